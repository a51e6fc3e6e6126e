"""Signal conditioning for pen trajectories.

Resampling onto a uniform grid, zero-phase low-pass smoothing, speed
profiles, and the 8-connected integer rasterization used to measure
distances along the ink.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import signal as _sig
from scipy.interpolate import CubicSpline

logger = logging.getLogger(__name__)

SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class RawSignature:
    """Captured pen samples: times in seconds, coordinates in device units."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    pen_down: np.ndarray
    source_id: str = ""

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        n = t.size
        if n < 2:
            raise ValueError("signature needs at least 2 samples")
        for name in ("x", "y", "p", "pen_down"):
            if np.asarray(getattr(self, name)).shape != (n,):
                raise ValueError(f"field {name} length mismatch")
        if not np.all(np.diff(t) > 0):
            raise ValueError("timestamps must be strictly increasing")

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled planar curve: points[i] at time t0 + i * dt."""

    t0: float
    dt: float
    points: np.ndarray

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) * self.dt


@dataclass(frozen=True)
class SpeedProfile:
    """Scalar speed magnitude on the same grid as its trajectory."""

    t0: float
    dt: float
    values: np.ndarray

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) * self.dt


@dataclass(frozen=True)
class DiscretePath:
    """8-connected rasterization of a trajectory.

    cells: (m, 2) integer grid cells, consecutive cells are king moves.
    cumulative_length: arc length at each cell (1 per axial step, sqrt(2)
    per diagonal step).
    sample_anchor: for each trajectory sample, the index of its cell.
    """

    cells: np.ndarray
    cumulative_length: np.ndarray
    sample_anchor: np.ndarray


@dataclass(frozen=True)
class SmoothConfig:
    enabled: bool = True
    cutoff_hz: float = 14.0
    order: int = 2
    family: str = "butter"
    ripple_db: float = 0.5
    attenuation_db: float = 30.0


def resample(raw: RawSignature, target_rate: float) -> Trajectory:
    """Resample onto a uniform grid with a natural cubic spline.

    Inputs with fewer than 4 samples fall back to linear interpolation.
    """
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    t = np.asarray(raw.t, dtype=float)
    dt = 1.0 / target_rate
    n_out = int(np.floor((t[-1] - t[0]) * target_rate + 1e-9)) + 1
    grid = t[0] + np.arange(n_out) * dt
    if t.size < 4:
        logger.warning("resample: %d samples, falling back to linear", t.size)
        x = np.interp(grid, t, raw.x)
        y = np.interp(grid, t, raw.y)
    else:
        x = CubicSpline(t, raw.x, bc_type="natural")(grid)
        y = CubicSpline(t, raw.y, bc_type="natural")(grid)
    return Trajectory(t0=float(t[0]), dt=dt, points=np.column_stack([x, y]))


def _design_sos(cfg: SmoothConfig, fs: float) -> np.ndarray:
    if cfg.family == "butter":
        return _sig.butter(cfg.order, cfg.cutoff_hz, fs=fs, output="sos")
    if cfg.family == "cheby1":
        return _sig.cheby1(cfg.order, cfg.ripple_db, cfg.cutoff_hz, fs=fs, output="sos")
    if cfg.family == "cheby2":
        return _sig.cheby2(cfg.order, cfg.attenuation_db, cfg.cutoff_hz, fs=fs, output="sos")
    raise ValueError(f"unknown filter family: {cfg.family!r}")


def smooth(traj: Trajectory, cfg: SmoothConfig) -> Trajectory:
    """Zero-phase low-pass both coordinates. Returns the input if disabled."""
    if not cfg.enabled:
        return traj
    fs = 1.0 / traj.dt
    if cfg.cutoff_hz >= 0.5 * fs:
        raise ValueError("cutoff must be below the Nyquist rate")
    sos = _design_sos(cfg, fs)
    pts = _sig.sosfiltfilt(sos, traj.points, axis=0)
    return Trajectory(t0=traj.t0, dt=traj.dt, points=pts)


def speed_profile(traj: Trajectory) -> SpeedProfile:
    """Central-difference speed magnitude (one-sided at the ends)."""
    if len(traj) < 3:
        raise ValueError("need at least 3 points for a speed profile")
    vx = np.gradient(traj.points[:, 0], traj.dt)
    vy = np.gradient(traj.points[:, 1], traj.dt)
    return SpeedProfile(t0=traj.t0, dt=traj.dt, values=np.hypot(vx, vy))


def _bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    # 8-connected line, endpoints inclusive
    cells = []
    dx, sx = abs(x1 - x0), 1 if x0 < x1 else -1
    dy, sy = -abs(y1 - y0), 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        cells.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return cells
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def eight_connected(traj: Trajectory, scale: float = 1.0) -> DiscretePath:
    """Rasterize the trajectory onto an integer grid with Bresenham segments.

    scale multiplies coordinates before rounding; consecutive duplicate
    cells are collapsed so arc length counts every move once.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    pts = np.rint(traj.points * scale).astype(int)
    cells: list[tuple[int, int]] = [tuple(pts[0])]
    anchor = np.zeros(len(traj), dtype=int)
    for i in range(1, len(traj)):
        tail = cells[-1]
        head = (int(pts[i, 0]), int(pts[i, 1]))
        if head != tail:
            cells.extend(_bresenham(*tail, *head)[1:])
        anchor[i] = len(cells) - 1
    arr = np.asarray(cells, dtype=int)
    steps = np.abs(np.diff(arr, axis=0))
    costs = np.where(steps.sum(axis=1) == 2, SQRT2, 1.0)
    cum = np.concatenate([[0.0], np.cumsum(costs)])
    return DiscretePath(cells=arr, cumulative_length=cum, sample_anchor=anchor)


def path_midpoint(path: DiscretePath, a: int, b: int) -> np.ndarray:
    """Cell halfway along the path between cell indices a and b.

    Halfway is measured in accumulated arc length; ties go to the lower
    index.
    """
    if a > b:
        raise ValueError("a must not exceed b")
    if a == b:
        return path.cells[a].astype(float)
    seg = path.cumulative_length[a : b + 1] - path.cumulative_length[a]
    i = int(np.argmin(np.abs(seg - 0.5 * seg[-1])))
    return path.cells[a + i].astype(float)
