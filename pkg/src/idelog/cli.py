"""Command line front end.

Subcommands: decompose, synthesize, reconstruct, evaluate, compare.
Exit codes: 0 ok, 1 usage, 2 unreadable or malformed input, 3 numeric
failure. Report paths write delimited tables plus PNG figures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import fileio, synthetic
from .pipeline import (
    PipelineConfig,
    PipelineError,
    config_digest,
    config_from_dict,
    decompose,
)
from .verification import (
    FULL_CHANNELS,
    VELOCITY_CHANNELS,
    FeatureSequence,
    det_area_gap,
    det_curve,
    equal_error_rate,
    evaluate_protocol,
    signature_features,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102
        raise UsageError(message)


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON pipeline configuration")
    p.add_argument("--extractor", choices=["idelog", "xzero"])
    p.add_argument("--rate", type=float, help="resampling rate in Hz")
    p.add_argument("--no-smooth", action="store_true", help="skip the low-pass filter")
    p.add_argument("--eta", type=float, help="refinement step size")
    p.add_argument("--passes", type=int, help="refinement passes")
    p.add_argument("--scale", type=float, help="rasterization scale")


def build_parser() -> _Parser:
    p = _Parser(prog="idelog", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="extract sigma-lognormal models")
    d.add_argument("inputs", nargs="+", type=Path, help="signature files or directories")
    d.add_argument("-o", "--output", type=Path, required=True)
    d.add_argument("--format", default="auto", choices=["auto", "canonical", "svc"])
    d.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    _add_pipeline_flags(d)
    d.set_defaults(func=cmd_decompose)

    s = sub.add_parser("synthesize", help="render signatures from models")
    s.add_argument("-o", "--output", type=Path, required=True)
    s.add_argument("--model", nargs="*", type=Path, default=[], help="model files to render")
    s.add_argument("--count", type=int, default=0, help="random signatures to draw")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--strokes", nargs=2, type=int, default=[4, 12], metavar=("MIN", "MAX"))
    s.add_argument("--duration", nargs=2, type=float, default=[1.0, 5.0], metavar=("MIN", "MAX"))
    s.add_argument("--sample-rate", type=float, default=100.0)
    s.set_defaults(func=cmd_synthesize)

    r = sub.add_parser("reconstruct", help="synthesize trajectories from model files")
    r.add_argument("models", nargs="+", type=Path)
    r.add_argument("-o", "--output", type=Path, required=True)
    r.add_argument("--sample-rate", type=float, default=100.0)
    r.set_defaults(func=cmd_reconstruct)

    e = sub.add_parser("evaluate", help="verification protocol on two corpora")
    e.add_argument("--original", type=Path, required=True)
    e.add_argument("--reconstructed", type=Path, required=True)
    e.add_argument("-o", "--output", type=Path, required=True)
    e.add_argument("--channels", default="full", choices=["full", "velocity"])
    e.add_argument("--references", type=int, default=5)
    e.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("compare", help="run both extractors and tabulate")
    c.add_argument("inputs", nargs="+", type=Path)
    c.add_argument("-o", "--output", type=Path, required=True)
    c.add_argument("--format", default="auto", choices=["auto", "canonical", "svc"])
    c.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True)
    _add_pipeline_flags(c)
    c.set_defaults(func=cmd_compare)
    return p


def _resolve_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"config file: {e}") from None
        cfg = config_from_dict(raw)
    else:
        cfg = PipelineConfig()
    if getattr(args, "extractor", None):
        cfg = dataclasses.replace(cfg, extractor=args.extractor)
    if getattr(args, "rate", None):
        cfg = dataclasses.replace(cfg, target_rate=args.rate)
    if getattr(args, "scale", None):
        cfg = dataclasses.replace(cfg, grid_scale=args.scale)
    if getattr(args, "no_smooth", False):
        cfg = dataclasses.replace(
            cfg, smoothing=dataclasses.replace(cfg.smoothing, enabled=False)
        )
    refinement = cfg.refinement
    if getattr(args, "eta", None) is not None:
        refinement = dataclasses.replace(refinement, eta=args.eta)
    if getattr(args, "passes", None) is not None:
        refinement = dataclasses.replace(refinement, passes=args.passes)
    if refinement is not cfg.refinement:
        cfg = dataclasses.replace(cfg, refinement=refinement)
    return cfg


def _collect_inputs(paths: list[Path]) -> list[Path]:
    files: list[Path] = []
    for p in paths:
        if p.is_dir():
            files.extend(sorted([*p.glob("*.txt"), *p.glob("*.svc")]))
        else:
            files.append(p)
    if not files:
        raise UsageError("no input files")
    return files


def _write_config(cfg: PipelineConfig, outdir: Path) -> None:
    payload = {"digest": config_digest(cfg), "config": dataclasses.asdict(cfg)}
    (outdir / "config.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _summary_rows(rows: list[tuple], cols: dict[str, int]) -> list[tuple]:
    out = []
    for name, idx in cols.items():
        vals = np.array([float(r[idx]) for r in rows])
        out.append((name, float(vals.mean()), float(vals.std())))
    return out


def cmd_decompose(args) -> int:
    cfg = _resolve_config(args)
    files = _collect_inputs(args.inputs)
    outdir = args.output
    outdir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK
    rows = []
    for f in files:
        try:
            raw = fileio.read_signature(f, args.format)
        except (OSError, ValueError) as e:
            logger.error("%s: %s", f, e)
            worst = max(worst, EXIT_INPUT)
            continue
        try:
            result = decompose(raw, cfg)
        except PipelineError as e:
            logger.error("%s: %s", f, e)
            worst = max(worst, EXIT_NUMERIC)
            continue
        stem = f.stem
        fileio.write_model(result.model, outdir / f"{stem}.model.json")
        fileio.export_movement(
            outdir / f"{stem}.movement.tsv",
            result.trajectory.times,
            result.trajectory.points,
            result.movement.trajectory.points,
            result.speed.values,
            result.movement.speed.values,
        )
        if args.figures:
            from .plots import render_decomposition

            render_decomposition(result, outdir / f"{stem}.png")
        rep = result.report
        rows.append(
            (
                f.name,
                rep.nb_log,
                rep.snr_t,
                rep.snr_v,
                rep.snr_t_per_log,
                rep.snr_v_per_log,
                result.initial_report.snr_t if result.initial_report else None,
                result.trace.best_pass if result.trace else 0,
            )
        )
    if rows:
        fileio.write_tsv(
            outdir / "aggregate.tsv",
            ["file", "strokes", "snr_t_db", "snr_v_db", "snr_t_per_stroke",
             "snr_v_per_stroke", "snr_t_initial_db", "best_pass"],
            rows,
        )
        fileio.write_tsv(
            outdir / "summary.tsv",
            ["metric", "mean", "std"],
            _summary_rows(rows, {"snr_t_db": 2, "snr_v_db": 3, "strokes": 1}),
        )
    _write_config(cfg, outdir)
    return worst


def cmd_synthesize(args) -> int:
    if not args.model and args.count <= 0:
        raise UsageError("give --model files or a positive --count")
    outdir = args.output
    outdir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK
    if args.model:
        for mf in args.model:
            try:
                model = fileio.read_model(mf)
            except (OSError, ValueError) as e:
                logger.error("%s: %s", mf, e)
                worst = max(worst, EXIT_INPUT)
                continue
            stem = mf.stem.removesuffix(".model")
            raw = synthetic.signature_from_model(model, args.sample_rate, source_id=stem)
            fileio.write_signature(raw, outdir / f"{stem}.txt")
        return worst
    gen = synthetic.GeneratorConfig(
        seed=args.seed,
        count=args.count,
        strokes_min=args.strokes[0],
        strokes_max=args.strokes[1],
        duration_min=args.duration[0],
        duration_max=args.duration[1],
        rate=args.sample_rate,
    )
    for i, (model, raw) in enumerate(synthetic.generate_corpus(gen)):
        stem = f"syn{i:03d}"
        fileio.write_signature(raw, outdir / f"{stem}.txt")
        fileio.write_model(
            dataclasses.replace(model, meta={"provenance": {"source": "synthetic", "seed": args.seed, "index": i}}),
            outdir / f"{stem}.model.json",
        )
    (outdir / "manifest.json").write_text(
        json.dumps(dataclasses.asdict(gen), indent=2, sort_keys=True) + "\n"
    )
    return worst


def cmd_reconstruct(args) -> int:
    outdir = args.output
    outdir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK
    for mf in args.models:
        try:
            model = fileio.read_model(mf)
        except (OSError, ValueError) as e:
            logger.error("%s: %s", mf, e)
            worst = max(worst, EXIT_INPUT)
            continue
        stem = mf.stem.removesuffix(".model")
        raw = synthetic.signature_from_model(model, args.sample_rate, source_id=stem)
        fileio.write_signature(raw, outdir / f"{stem}.txt")
    return worst


def _load_corpus(d: Path, channels: tuple[str, ...]) -> dict[str, list[FeatureSequence]]:
    if not d.is_dir():
        raise ValueError(f"{d}: not a directory")
    files = sorted([*d.glob("*.txt"), *d.glob("*.svc")])
    if not files:
        raise ValueError(f"{d}: no signature files")
    corpus: dict[str, list[FeatureSequence]] = {}
    for f in files:
        wid = f.stem.split("_")[0]
        raw = fileio.read_signature(f)
        corpus.setdefault(wid, []).append(signature_features(raw, channels))
    return corpus


def cmd_evaluate(args) -> int:
    channels = FULL_CHANNELS if args.channels == "full" else VELOCITY_CHANNELS
    outdir = args.output
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        corpus_a = _load_corpus(args.original, channels)
        corpus_b = _load_corpus(args.reconstructed, channels)
    except (OSError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_INPUT
    shape_a = {w: len(s) for w, s in corpus_a.items()}
    shape_b = {w: len(s) for w, s in corpus_b.items()}
    if shape_a != shape_b:
        logger.error("corpus shapes differ: %s vs %s", shape_a, shape_b)
        return EXIT_INPUT
    try:
        scores_a = evaluate_protocol(corpus_a, args.references)
        scores_b = evaluate_protocol(corpus_b, args.references)
        det_a, det_b = det_curve(scores_a), det_curve(scores_b)
        eer_a, eer_b = equal_error_rate(scores_a), equal_error_rate(scores_b)
        gap = det_area_gap(det_a, det_b)
    except ValueError as e:
        logger.error("%s", e)
        return EXIT_NUMERIC
    fileio.export_det(outdir / "det_original.tsv", det_a)
    fileio.export_det(outdir / "det_reconstructed.tsv", det_b)
    fileio.write_tsv(
        outdir / "metrics.tsv",
        ["name", "value"],
        [("eer_original", eer_a), ("eer_reconstructed", eer_b), ("det_area_gap", gap)],
    )
    if args.figures:
        from .plots import render_det

        render_det({"original": det_a, "reconstructed": det_b}, outdir / "det.png")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _resolve_config(args)
    files = _collect_inputs(args.inputs)
    outdir = args.output
    outdir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK
    rows = []
    pairs = []
    labels = []
    for f in files:
        try:
            raw = fileio.read_signature(f, args.format)
        except (OSError, ValueError) as e:
            logger.error("%s: %s", f, e)
            worst = max(worst, EXIT_INPUT)
            continue
        per_file = {}
        for extractor in ("idelog", "xzero"):
            ecfg = dataclasses.replace(cfg, extractor=extractor)
            try:
                result = decompose(raw, ecfg)
            except PipelineError as e:
                logger.error("%s [%s]: %s", f, extractor, e)
                worst = max(worst, EXIT_NUMERIC)
                continue
            rep = result.report
            rows.append((f.name, extractor, rep.nb_log, rep.snr_t, rep.snr_v))
            per_file[extractor] = rep.snr_t
        if len(per_file) == 2:
            labels.append(f.name)
            pairs.append((per_file["idelog"], per_file["xzero"]))
    if rows:
        fileio.write_tsv(
            outdir / "comparison.tsv",
            ["file", "extractor", "strokes", "snr_t_db", "snr_v_db"],
            rows,
        )
        summary = []
        for extractor in ("idelog", "xzero"):
            sel = [r for r in rows if r[1] == extractor]
            if not sel:
                continue
            st = np.array([r[3] for r in sel])
            sv = np.array([r[4] for r in sel])
            nb = np.array([r[2] for r in sel], dtype=float)
            summary.append(
                (extractor, float(st.mean()), float(st.std()),
                 float(sv.mean()), float(sv.std()), float(nb.mean()))
            )
        fileio.write_tsv(
            outdir / "summary.tsv",
            ["extractor", "snr_t_mean", "snr_t_std", "snr_v_mean", "snr_v_std", "strokes_mean"],
            summary,
        )
    if args.figures and pairs:
        from .plots import render_comparison

        render_comparison(labels, pairs, outdir / "compare.png")
    _write_config(cfg, outdir)
    return worst


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args))
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as e:
        logger.error("%s", e)
        return EXIT_NUMERIC
    except (OSError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
