"""Command line interface, run through the installed console script."""

import filecmp
import json
import subprocess
from pathlib import Path

import numpy as np
import pytest

from idelog.fileio import read_model, read_signature, read_tsv, write_model, write_signature
from idelog.model import LognormalStroke, SigmaLognormalModel
from idelog.synthetic import writer_corpus


def _run(*argv):
    return subprocess.run(["idelog", *argv], capture_output=True, text=True)


def _tree(root):
    return sorted(p.relative_to(root) for p in Path(root).rglob("*") if p.is_file())


def _trees_identical(a, b):
    fa, fb = _tree(a), _tree(b)
    if fa != fb:
        return False
    return all(filecmp.cmp(a / rel, b / rel, shallow=False) for rel in fa)


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    r = _run(
        "synthesize", "-o", str(out), "--count", "3", "--seed", "7",
        "--strokes", "4", "6", "--duration", "1", "2",
    )
    assert r.returncode == 0, r.stderr
    return out


def test_no_arguments_is_a_usage_error():
    r = _run()
    assert r.returncode == 1
    assert "error" in r.stderr.lower()


def test_synthesize_needs_models_or_count(tmp_path):
    r = _run("synthesize", "-o", str(tmp_path / "x"))
    assert r.returncode == 1
    assert "--count" in r.stderr


def test_synthesize_is_deterministic(tmp_path, corpus_dir):
    again = tmp_path / "again"
    r = _run(
        "synthesize", "-o", str(again), "--count", "3", "--seed", "7",
        "--strokes", "4", "6", "--duration", "1", "2",
    )
    assert r.returncode == 0
    assert _trees_identical(corpus_dir, again)
    names = [p.name for p in sorted(again.iterdir())]
    assert "manifest.json" in names
    assert "syn000.txt" in names and "syn000.model.json" in names
    manifest = json.loads((again / "manifest.json").read_text())
    assert manifest["seed"] == 7 and manifest["count"] == 3


def test_decompose_writes_the_full_report_tree(tmp_path, corpus_dir):
    out = tmp_path / "dec"
    r = _run("decompose", str(corpus_dir), "-o", str(out))
    assert r.returncode == 0, r.stderr
    for stem in ("syn000", "syn001", "syn002"):
        assert (out / f"{stem}.model.json").is_file()
        assert (out / f"{stem}.movement.tsv").is_file()
        assert (out / f"{stem}.png").is_file()
    header, rows = read_tsv(out / "aggregate.tsv")
    assert header == [
        "file", "strokes", "snr_t_db", "snr_v_db", "snr_t_per_stroke",
        "snr_v_per_stroke", "snr_t_initial_db", "best_pass",
    ]
    assert len(rows) == 3
    assert all(float(row[2]) > 10.0 for row in rows)
    assert (out / "summary.tsv").is_file()
    digest = json.loads((out / "config.json").read_text())["digest"]
    model = read_model(out / "syn000.model.json")
    assert model.meta["provenance"]["config"] == digest


def test_decompose_reruns_are_byte_identical(tmp_path, corpus_dir):
    first = tmp_path / "d1"
    second = tmp_path / "d2"
    assert _run("decompose", str(corpus_dir), "-o", str(first)).returncode == 0
    assert _run("decompose", str(corpus_dir), "-o", str(second)).returncode == 0
    assert _trees_identical(first, second)


def test_decompose_without_figures_skips_pngs(tmp_path, corpus_dir):
    out = tmp_path / "plain"
    r = _run(
        "decompose", str(corpus_dir / "syn000.txt"), "-o", str(out), "--no-figures"
    )
    assert r.returncode == 0
    assert not list(out.glob("*.png"))
    assert (out / "syn000.model.json").is_file()


def test_decompose_missing_input_exits_two(tmp_path):
    r = _run("decompose", str(tmp_path / "nope.txt"), "-o", str(tmp_path / "o"))
    assert r.returncode == 2


def test_decompose_reads_svc_files(tmp_path, corpus_dir):
    sig = read_signature(corpus_dir / "syn000.txt")
    svc_dir = tmp_path / "svc"
    svc_dir.mkdir()
    lines = [str(sig.t.size)]
    for i in range(sig.t.size):
        lines.append(f"{sig.x[i]!r} {sig.y[i]!r} {int(round(sig.t[i] * 1000))} 1")
    (svc_dir / "probe.svc").write_text("\n".join(lines) + "\n")
    out = tmp_path / "svc_out"
    r = _run("decompose", str(svc_dir), "-o", str(out), "--no-figures")
    assert r.returncode == 0, r.stderr
    assert (out / "probe.model.json").is_file()


def test_evaluate_corpus_against_itself(tmp_path):
    writers = tmp_path / "writers"
    writers.mkdir()
    for wid, sigs in writer_corpus(2, 6, seed=3).items():
        for k, sig in enumerate(sigs):
            write_signature(sig, writers / f"{wid}_s{k:02d}.txt")
    out = tmp_path / "ev"
    r = _run(
        "evaluate", "--original", str(writers), "--reconstructed", str(writers),
        "-o", str(out),
    )
    assert r.returncode == 0, r.stderr
    header, rows = read_tsv(out / "metrics.tsv")
    assert header == ["name", "value"]
    metrics = {name: float(value) for name, value in rows}
    assert metrics["det_area_gap"] == 0.0
    assert metrics["eer_original"] == metrics["eer_reconstructed"]
    assert (out / "det_original.tsv").is_file()
    assert (out / "det_reconstructed.tsv").is_file()
    assert (out / "det.png").is_file()


def test_evaluate_missing_directory_exits_two(tmp_path):
    present = tmp_path / "present"
    present.mkdir()
    write_signature(
        list(writer_corpus(1, 1, seed=0).values())[0][0], present / "w00_s00.txt"
    )
    r = _run(
        "evaluate", "--original", str(tmp_path / "absent"),
        "--reconstructed", str(present), "-o", str(tmp_path / "o"),
    )
    assert r.returncode == 2


def test_compare_tabulates_both_extractors(tmp_path, corpus_dir):
    out = tmp_path / "cmp"
    r = _run(
        "compare", str(corpus_dir / "syn000.txt"), str(corpus_dir / "syn001.txt"),
        "-o", str(out),
    )
    assert r.returncode == 0, r.stderr
    header, rows = read_tsv(out / "comparison.tsv")
    assert header == ["file", "extractor", "strokes", "snr_t_db", "snr_v_db"]
    assert len(rows) == 4
    assert {row[1] for row in rows} == {"idelog", "xzero"}
    s_header, s_rows = read_tsv(out / "summary.tsv")
    assert [row[0] for row in s_rows] == ["idelog", "xzero"]
    assert (out / "compare.png").is_file()


def test_reconstruct_round_trips_a_single_stroke(tmp_path):
    model = SigmaLognormalModel(
        origin=(10.0, 20.0),
        duration=1.2,
        strokes=(
            LognormalStroke(D=60.0, t0=0.05, mu=-1.1, sigma=0.2, theta_s=0.2, theta_e=1.1),
        ),
    )
    mf = tmp_path / "one.model.json"
    write_model(model, mf)
    out = tmp_path / "rec"
    r = _run("reconstruct", str(mf), "-o", str(out))
    assert r.returncode == 0, r.stderr
    sig = read_signature(out / "one.txt")
    assert sig.x[0] == pytest.approx(10.0, abs=1e-9)
    assert sig.y[0] == pytest.approx(20.0, abs=1e-9)
    v = np.hypot(np.gradient(sig.x, sig.t), np.gradient(sig.y, sig.t))
    interior = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]) & (v[1:-1] > 0.05 * v.max())
    assert int(np.sum(interior)) == 1


def test_reconstruct_rejects_bad_model_file(tmp_path):
    bad = tmp_path / "bad.model.json"
    bad.write_text("{\"format_version\": 99}\n")
    r = _run("reconstruct", str(bad), "-o", str(tmp_path / "o"))
    assert r.returncode == 2
