"""Signature verification harness.

Feature sequences from captured signatures, a DTW distance with path
length normalization, a reference/probe protocol with configurable
score aggregation, and DET/EER scoring.
"""

from __future__ import annotations

import logging
import statistics
from dataclasses import dataclass

import numpy as np

from .signals import RawSignature

logger = logging.getLogger(__name__)

FULL_CHANNELS = ("x", "y", "speed", "accel", "pen")
VELOCITY_CHANNELS = ("speed",)

_REFERENCES = 5


@dataclass(frozen=True)
class FeatureSequence:
    """Per-sample feature matrix, z-normalized per channel."""

    values: np.ndarray
    channels: tuple[str, ...]


@dataclass(frozen=True)
class ScoreSet:
    genuine: np.ndarray
    impostor: np.ndarray


@dataclass(frozen=True)
class DETCurve:
    far: np.ndarray
    frr: np.ndarray


def signature_features(
    raw: RawSignature, channels: tuple[str, ...] = FULL_CHANNELS
) -> FeatureSequence:
    """Build the per-sample feature matrix for one signature."""
    t = np.asarray(raw.t, dtype=float)
    vx = np.gradient(raw.x, t)
    vy = np.gradient(raw.y, t)
    speed = np.hypot(vx, vy)
    pool = {
        "x": np.asarray(raw.x, dtype=float),
        "y": np.asarray(raw.y, dtype=float),
        "speed": speed,
        "accel": np.hypot(np.gradient(vx, t), np.gradient(vy, t)),
        "pen": np.asarray(raw.pen_down, dtype=float),
    }
    cols = []
    for name in channels:
        if name not in pool:
            raise ValueError(f"unknown feature channel {name!r}")
        c = pool[name]
        std = float(np.std(c))
        cols.append((c - np.mean(c)) / std if std > 0 else np.zeros_like(c))
    return FeatureSequence(values=np.column_stack(cols), channels=tuple(channels))


def _dtw_python(cost: np.ndarray) -> float:
    n, m = cost.shape
    acc = np.full((n, m), np.inf)
    length = np.zeros((n, m), dtype=np.int64)
    acc[0, 0] = cost[0, 0]
    length[0, 0] = 1
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                continue
            best = np.inf
            blen = 0
            if i > 0 and j > 0 and acc[i - 1, j - 1] < best:
                best, blen = acc[i - 1, j - 1], length[i - 1, j - 1]
            if i > 0 and acc[i - 1, j] < best:
                best, blen = acc[i - 1, j], length[i - 1, j]
            if j > 0 and acc[i, j - 1] < best:
                best, blen = acc[i, j - 1], length[i, j - 1]
            acc[i, j] = cost[i, j] + best
            length[i, j] = blen + 1
    return float(acc[n - 1, m - 1] / length[n - 1, m - 1])


try:
    from numba import njit

    _dtw_kernel = njit(cache=True)(_dtw_python)
except ImportError:  # pragma: no cover
    logger.warning("numba unavailable, DTW falls back to pure python")
    _dtw_kernel = _dtw_python


def dtw_distance(a: FeatureSequence, b: FeatureSequence) -> float:
    """Path-length-normalized DTW with Euclidean local cost.

    Steps are the symmetric set (diagonal, down, right); the accumulated
    cost at the final cell is divided by the number of cells on its
    optimal path.
    """
    xa, xb = a.values, b.values
    if xa.shape[1] != xb.shape[1]:
        raise ValueError("feature dimensionality mismatch")
    if xa.shape[0] == 0 or xb.shape[0] == 0:
        raise ValueError("empty feature sequence")
    diff = xa[:, None, :] - xb[None, :, :]
    cost = np.sqrt(np.sum(diff * diff, axis=2))
    return float(_dtw_kernel(np.ascontiguousarray(cost)))


def evaluate_protocol(
    corpus: dict[str, list[FeatureSequence]],
    references: int = _REFERENCES,
    aggregate: str = "min",
) -> ScoreSet:
    """Score every probe against each writer's first references.

    A probe's score aggregates its DTW distances to the writer's reference
    set (minimum by default, mean optionally). Genuine scores come from
    the writer's own remaining signatures, impostor scores from every
    other writer's probes. Writers without enough signatures are skipped.
    """
    if aggregate == "min":
        agg = min
    elif aggregate == "mean":
        agg = statistics.fmean
    else:
        raise ValueError(f"unknown aggregation {aggregate!r}")
    refs: dict[str, list[FeatureSequence]] = {}
    probes: dict[str, list[FeatureSequence]] = {}
    for wid in sorted(corpus):
        seqs = corpus[wid]
        if len(seqs) < references + 1:
            logger.warning("writer %s skipped: %d signatures", wid, len(seqs))
            continue
        refs[wid] = seqs[:references]
        probes[wid] = seqs[references:]
    genuine, impostor = [], []
    for wid, ref_set in refs.items():
        for probe_wid, probe_set in probes.items():
            bucket = genuine if probe_wid == wid else impostor
            for probe in probe_set:
                bucket.append(agg(dtw_distance(probe, r) for r in ref_set))
    return ScoreSet(genuine=np.array(genuine), impostor=np.array(impostor))


def det_curve(scores: ScoreSet) -> DETCurve:
    """FAR/FRR over the sweep of acceptance thresholds (accept when the
    score is at or below the threshold), with sentinel endpoints."""
    gen = np.sort(scores.genuine)
    imp = np.sort(scores.impostor)
    if gen.size == 0 or imp.size == 0:
        raise ValueError("need both genuine and impostor scores")
    thresholds = np.unique(np.concatenate([gen, imp]))
    far = np.searchsorted(imp, thresholds, side="right") / imp.size
    frr = 1.0 - np.searchsorted(gen, thresholds, side="right") / gen.size
    far = np.concatenate([[0.0], far, [1.0]])
    frr = np.concatenate([[1.0], frr, [0.0]])
    return DETCurve(far=far, frr=frr)


def equal_error_rate(scores: ScoreSet) -> float:
    """EER with linear interpolation between bracketing thresholds."""
    curve = det_curve(scores)
    diff = curve.far - curve.frr
    k = int(np.argmax(diff >= 0.0))
    if diff[k] == 0.0:
        return float(curve.far[k])
    d0, d1 = diff[k - 1], diff[k]
    w = -d0 / (d1 - d0)
    return float(curve.far[k - 1] + w * (curve.far[k] - curve.far[k - 1]))


def _staircase(curve: DETCurve) -> tuple[np.ndarray, np.ndarray]:
    # collapse duplicate FAR values to their best (lowest) FRR
    far, inv = np.unique(curve.far, return_inverse=True)
    frr = np.full(far.size, np.inf)
    np.minimum.at(frr, inv, curve.frr)
    return far, frr


def det_area_gap(a: DETCurve, b: DETCurve) -> float:
    """Area between two DET curves over the common FAR axis."""
    fa, ra = _staircase(a)
    fb, rb = _staircase(b)
    grid = np.unique(np.concatenate([fa, fb]))
    ga = np.interp(grid, fa, ra)
    gb = np.interp(grid, fb, rb)
    return float(np.trapezoid(np.abs(ga - gb), grid))
