"""File formats.

Readers and writers for captured signatures (native text format and SVC
tablet files), JSON model files, and the tab-separated tables the CLI
emits.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .model import LognormalStroke, SigmaLognormalModel
from .signals import RawSignature
from .verification import DETCurve

logger = logging.getLogger(__name__)

MAGIC = "IDELOG/1"
FORMAT_VERSION = 1

_MODEL_KEYS = ("format_version", "origin", "duration", "strokes")
_STROKE_KEYS = ("D", "t0", "mu", "sigma", "theta_s", "theta_e")


def fmt(x: float) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(x))


def read_signature(path: str | Path, fmt_name: str = "auto") -> RawSignature:
    """Read a captured signature; fmt_name is 'canonical', 'svc' or 'auto'
    (sniff the first line)."""
    path = Path(path)
    text = path.read_text()
    if fmt_name == "auto":
        first = text.lstrip().splitlines()[0].strip() if text.strip() else ""
        fmt_name = "canonical" if first == MAGIC else "svc"
    if fmt_name == "canonical":
        return _read_canonical(text, path.name)
    if fmt_name == "svc":
        return _read_svc(text, path.name)
    raise ValueError(f"unknown signature format {fmt_name!r}")


def _read_canonical(text: str, source: str) -> RawSignature:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise ValueError(f"{source}: missing {MAGIC} header")
    t, x, y, p = [], [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 4:
            raise ValueError(f"{source}: line {lineno}: expected 4 fields, got {len(parts)}")
        try:
            vals = [float(v) for v in parts]
        except ValueError as e:
            raise ValueError(f"{source}: line {lineno}: {e}") from None
        t.append(vals[0]); x.append(vals[1]); y.append(vals[2]); p.append(vals[3])
    if len(t) < 2:
        raise ValueError(f"{source}: fewer than 2 samples")
    t_arr = np.array(t)
    if not np.all(np.diff(t_arr) > 0):
        raise ValueError(f"{source}: timestamps must be strictly increasing")
    p_arr = np.array(p)
    return RawSignature(
        t=t_arr, x=np.array(x), y=np.array(y), p=p_arr,
        pen_down=p_arr > 0, source_id=source,
    )


def _read_svc(text: str, source: str) -> RawSignature:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{source}: empty file")
    try:
        count = int(lines[0].split()[0])
    except ValueError:
        raise ValueError(f"{source}: first line must be the sample count") from None
    records = lines[1:]
    if len(records) < count:
        raise ValueError(f"{source}: {len(records)} records, header says {count}")
    t, x, y, p = [], [], [], []
    dropped = 0
    for lineno, line in enumerate(records[:count], start=2):
        parts = line.split()
        if len(parts) < 4:
            raise ValueError(f"{source}: line {lineno}: expected at least 4 fields")
        try:
            xi, yi, ts, button = float(parts[0]), float(parts[1]), float(parts[2]), float(parts[3])
            pressure = float(parts[6]) if len(parts) >= 7 else button
        except ValueError as e:
            raise ValueError(f"{source}: line {lineno}: {e}") from None
        sec = ts / 1000.0
        if t and sec <= t[-1]:
            dropped += 1
            continue
        t.append(sec); x.append(xi); y.append(yi)
        p.append(pressure if button > 0 else 0.0)
    if dropped:
        logger.warning("%s: dropped %d repeated timestamps", source, dropped)
    if len(t) < 2:
        raise ValueError(f"{source}: fewer than 2 usable samples")
    p_arr = np.array(p)
    return RawSignature(
        t=np.array(t), x=np.array(x), y=np.array(y), p=p_arr,
        pen_down=p_arr > 0, source_id=source,
    )


def write_signature(raw: RawSignature, path: str | Path) -> None:
    """Write the native text format: header line then t x y p records."""
    lines = [MAGIC]
    for i in range(raw.t.size):
        lines.append(
            f"{fmt(raw.t[i])} {fmt(raw.x[i])} {fmt(raw.y[i])} {fmt(raw.p[i])}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def model_to_dict(model: SigmaLognormalModel) -> dict:
    d = {
        "format_version": FORMAT_VERSION,
        "origin": [model.origin[0], model.origin[1]],
        "duration": model.duration,
        "strokes": [
            {k: getattr(s, k) for k in _STROKE_KEYS} for s in model.strokes
        ],
    }
    d.update(model.meta)
    return d


def model_from_dict(d: dict, source: str = "<dict>") -> SigmaLognormalModel:
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"{source}: unsupported format version {version!r}")
    for key in _MODEL_KEYS:
        if key not in d:
            raise ValueError(f"{source}: missing field {key!r}")
    strokes = []
    for i, sd in enumerate(d["strokes"]):
        missing = [k for k in _STROKE_KEYS if k not in sd]
        if missing:
            raise ValueError(f"{source}: stroke {i} missing {missing}")
        strokes.append(LognormalStroke(**{k: float(sd[k]) for k in _STROKE_KEYS}))
    meta = {k: v for k, v in d.items() if k not in _MODEL_KEYS}
    return SigmaLognormalModel(
        origin=(float(d["origin"][0]), float(d["origin"][1])),
        duration=float(d["duration"]),
        strokes=tuple(strokes),
        meta=meta,
    )


def write_model(model: SigmaLognormalModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n"
    )


def read_model(path: str | Path) -> SigmaLognormalModel:
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"{path.name}: not valid JSON: {e}") from None
    return model_from_dict(d, path.name)


def write_tsv(path: str | Path, header: list[str], rows: list[tuple]) -> None:
    """Tab-separated table with a '#'-prefixed header row."""
    lines = ["#" + "\t".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if v is None:
                cells.append("nan")
            elif isinstance(v, (bool, np.bool_)):
                cells.append(str(bool(v)))
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, (float, np.floating)):
                cells.append(fmt(v))
            else:
                cells.append(str(v))
        lines.append("\t".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_tsv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{Path(path).name}: missing header row")
    header = lines[0][1:].split("\t")
    rows = [ln.split("\t") for ln in lines[1:] if ln]
    return header, rows


def export_movement(
    path: str | Path,
    times: np.ndarray,
    obs_points: np.ndarray,
    rec_points: np.ndarray,
    v_obs: np.ndarray,
    v_rec: np.ndarray,
) -> None:
    """Observed and reconstructed signals aligned by time, one row per
    grid instant."""
    rows = [
        (times[i], obs_points[i, 0], obs_points[i, 1],
         rec_points[i, 0], rec_points[i, 1], v_obs[i], v_rec[i])
        for i in range(len(times))
    ]
    write_tsv(path, ["t", "x_obs", "y_obs", "x_rec", "y_rec", "v_obs", "v_rec"], rows)


def export_det(path: str | Path, curve: DETCurve) -> None:
    rows = list(zip(curve.far.tolist(), curve.frr.tolist()))
    write_tsv(path, ["far", "frr"], rows)


def read_det(path: str | Path) -> DETCurve:
    header, rows = read_tsv(path)
    if header != ["far", "frr"]:
        raise ValueError(f"{Path(path).name}: not a DET table")
    far = np.array([float(r[0]) for r in rows])
    frr = np.array([float(r[1]) for r in rows])
    return DETCurve(far=far, frr=frr)
