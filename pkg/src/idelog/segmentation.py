"""Velocity-minima segmentation.

Splits a speed profile at its local minima, always keeping both endpoints,
and ties each minimum to a salient point on the rasterized trajectory.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .signals import DiscretePath, SpeedProfile, Trajectory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmentationConfig:
    filter_enabled: bool = False
    min_prominence: float = 0.01
    min_lobe_duration: float = 0.02


@dataclass(frozen=True)
class SalientPointSet:
    """Velocity minima anchored to the ink: times, positions, grid indices."""

    times: np.ndarray
    points: np.ndarray
    indices: np.ndarray

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True)
class VelocityLobe:
    """Speed samples of one stroke window on the full grid.

    samples is grid-length with zeros outside the window; for every lobe
    after the first, the shared left boundary sample is assigned to the
    earlier lobe so the lobes partition the profile exactly.
    """

    stroke_index: int
    t_start: float
    t_end: float
    start_index: int
    end_index: int
    dt: float
    samples: np.ndarray


def _interior_minima(w: np.ndarray) -> list[int]:
    # Strict minima plus left edges of minimum plateaus.
    out = []
    n = w.size
    i = 1
    while i < n - 1:
        j = i
        while j + 1 < n and w[j + 1] == w[i]:
            j += 1
        if j == n - 1:
            break
        if w[i - 1] > w[i] and w[j + 1] > w[i]:
            out.append(i)
        i = j + 1
    return out


def _prominence(w: np.ndarray, i: int) -> float:
    # Depth of the valley at i against its lowest enclosing barrier.
    left = w[: i + 1]
    below = np.nonzero(left < w[i])[0]
    lo = below[-1] + 1 if below.size else 0
    left_barrier = float(np.max(left[lo:]))
    right = w[i:]
    below = np.nonzero(right < w[i])[0]
    hi = below[0] if below.size else right.size
    right_barrier = float(np.max(right[:hi]))
    return min(left_barrier, right_barrier) - float(w[i])


def find_velocity_minima(profile: SpeedProfile, cfg: SegmentationConfig) -> np.ndarray:
    """Times of the segmentation boundaries, endpoints always included."""
    w = np.asarray(profile.values, dtype=float)
    if w.size < 3:
        return np.array([profile.t0, profile.t0 + (w.size - 1) * profile.dt])
    cand = _interior_minima(w)
    if cfg.filter_enabled and cand:
        floor = cfg.min_prominence * float(np.max(w))
        gap = cfg.min_lobe_duration / profile.dt
        cand = [i for i in cand if _prominence(w, i) >= floor]
        cand = [i for i in cand if i >= gap and (w.size - 1 - i) >= gap]
        cand = _merge_close(w, cand, gap)
    times = profile.t0 + np.array([0, *cand, w.size - 1], dtype=float) * profile.dt
    return times


def _merge_close(w: np.ndarray, cand: list[int], min_gap: float) -> list[int]:
    # Adjacent minima closer than min_gap collapse onto the deeper one.
    kept: list[int] = []
    for i in cand:
        if kept and i - kept[-1] < min_gap:
            if w[i] < w[kept[-1]]:
                kept[-1] = i
        else:
            kept.append(i)
    return kept


def locate_salient_points(
    minima: np.ndarray, traj: Trajectory, path: DiscretePath
) -> SalientPointSet:
    """Map minima times to cells of the 8-connected trajectory."""
    idx = np.rint((np.asarray(minima) - traj.t0) / traj.dt).astype(int)
    idx = np.clip(idx, 0, len(traj) - 1)
    idx[0], idx[-1] = 0, len(traj) - 1
    pts = path.cells[path.sample_anchor[idx]].astype(float)
    return SalientPointSet(times=np.asarray(minima, dtype=float), points=pts, indices=idx)


def extract_lobes(profile: SpeedProfile, minima: np.ndarray) -> list[VelocityLobe]:
    """One lobe per boundary pair; boundary samples go to the earlier lobe."""
    idx = np.rint((np.asarray(minima) - profile.t0) / profile.dt).astype(int)
    if idx.size < 2:
        raise ValueError("need at least two boundaries")
    lobes = []
    for j in range(1, idx.size):
        lo, hi = int(idx[j - 1]), int(idx[j])
        samples = np.zeros_like(profile.values)
        fill_lo = lo if j == 1 else lo + 1
        samples[fill_lo : hi + 1] = profile.values[fill_lo : hi + 1]
        lobes.append(
            VelocityLobe(
                stroke_index=j,
                t_start=float(minima[j - 1]),
                t_end=float(minima[j]),
                start_index=lo,
                end_index=hi,
                dt=profile.dt,
                samples=samples,
            )
        )
    return lobes
