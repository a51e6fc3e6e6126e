"""Sigma-lognormal forward model.

A movement is a sum of strokes; each stroke has a lognormal speed profile
and sweeps a circular arc between two virtual target points.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .segmentation import SalientPointSet, SegmentationConfig, find_velocity_minima
from .signals import SpeedProfile, Trajectory, speed_profile

logger = logging.getLogger(__name__)

SQRT2PI = math.sqrt(2.0 * math.pi)
ANGLE_EPS = 1e-6
TRUNCATION_WARN_FRACTION = 0.05


@dataclass(frozen=True)
class LognormalStroke:
    """One stroke: amplitude D, onset t0, log-time parameters (mu, sigma),
    start/end tangent angles in radians."""

    D: float
    t0: float
    mu: float
    sigma: float
    theta_s: float
    theta_e: float

    def __post_init__(self) -> None:
        if not (self.D > 0):
            raise ValueError("stroke amplitude must be positive")
        if not (self.sigma > 0):
            raise ValueError("sigma must be positive")
        for name in ("t0", "mu", "theta_s", "theta_e"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def sweep(self) -> float:
        return self.theta_e - self.theta_s

    @property
    def is_straight(self) -> bool:
        return abs(self.sweep) < ANGLE_EPS


@dataclass(frozen=True)
class SigmaLognormalModel:
    origin: tuple[float, float]
    duration: float
    strokes: tuple[LognormalStroke, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not (self.duration > 0):
            raise ValueError("duration must be positive")
        t0s = [s.t0 for s in self.strokes]
        if any(b < a for a, b in zip(t0s, t0s[1:])):
            raise ValueError("strokes must be ordered by onset time")

    @property
    def nb_log(self) -> int:
        return len(self.strokes)


@dataclass(frozen=True)
class ReconstructedMovement:
    """Synthesized trajectory plus its speed profile and salient points."""

    trajectory: Trajectory
    speed: SpeedProfile
    salient: SalientPointSet


def truncation_fraction(model: SigmaLognormalModel) -> float:
    """Largest per-stroke mass fraction left past the model duration."""
    if not model.strokes:
        return 0.0
    end = np.array([model.duration])
    return max(
        float(1.0 - lognormal_cdf(end, s.t0, s.mu, s.sigma)[0]) for s in model.strokes
    )


def check_truncation(model: SigmaLognormalModel, context: str = "model") -> float:
    """Warn once if a stroke keeps a material mass fraction past the end."""
    tail = truncation_fraction(model)
    if tail > TRUNCATION_WARN_FRACTION:
        logger.warning(
            "%s: a stroke keeps %.1f%% of its mass past the duration",
            context, 100.0 * tail,
        )
    return tail


def time_grid(duration: float, rate: float) -> np.ndarray:
    """Uniform grid [0, duration] at the given rate, endpoint included."""
    if duration <= 0 or rate <= 0:
        raise ValueError("duration and rate must be positive")
    n = int(np.floor(duration * rate + 1e-9)) + 1
    return np.arange(n) / rate


def lognormal_pdf(t: np.ndarray, t0: float, mu: float, sigma: float) -> np.ndarray:
    """Unit-area lognormal speed profile; zero at and before the onset."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = t > t0
    if np.any(m):
        dt = t[m] - t0
        z = (np.log(dt) - mu) / sigma
        out[m] = np.exp(-0.5 * z * z) / (dt * sigma * SQRT2PI)
    return out


def lognormal_cdf(t: np.ndarray, t0: float, mu: float, sigma: float) -> np.ndarray:
    """Fraction of the stroke completed by time t, in [0, 1]."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = t > t0
    if np.any(m):
        z = (np.log(t[m] - t0) - mu) / (sigma * math.sqrt(2.0))
        out[m] = 0.5 * (1.0 + erf(z))
    return out


def stroke_angle(stroke: LognormalStroke, t: np.ndarray) -> np.ndarray:
    """Tangent direction along the stroke: theta_s ramping to theta_e."""
    return stroke.theta_s + stroke.sweep * lognormal_cdf(t, stroke.t0, stroke.mu, stroke.sigma)


def stroke_velocity(stroke: LognormalStroke, t: np.ndarray) -> np.ndarray:
    """Velocity vector contribution of one stroke, shape (n, 2)."""
    speed = stroke.D * lognormal_pdf(t, stroke.t0, stroke.mu, stroke.sigma)
    phi = stroke_angle(stroke, t)
    return np.column_stack([speed * np.cos(phi), speed * np.sin(phi)])


def stroke_displacement(stroke: LognormalStroke, t: np.ndarray) -> np.ndarray:
    """Displacement contribution of one stroke from its start, shape (n, 2).

    Curved strokes trace a circular arc of radius D / |sweep|; the straight
    limit is a chord of length D along theta_s.
    """
    ell = lognormal_cdf(t, stroke.t0, stroke.mu, stroke.sigma)
    if stroke.is_straight:
        return stroke.D * np.column_stack(
            [ell * math.cos(stroke.theta_s), ell * math.sin(stroke.theta_s)]
        )
    phi = stroke.theta_s + stroke.sweep * ell
    r = stroke.D / stroke.sweep
    return r * np.column_stack(
        [np.sin(phi) - math.sin(stroke.theta_s),
         -np.cos(phi) + math.cos(stroke.theta_s)]
    )


def stroke_chord(stroke: LognormalStroke) -> np.ndarray:
    """Total displacement of a completed stroke (the ell -> 1 limit)."""
    if stroke.is_straight:
        return stroke.D * np.array([math.cos(stroke.theta_s), math.sin(stroke.theta_s)])
    r = stroke.D / stroke.sweep
    return r * np.array(
        [math.sin(stroke.theta_e) - math.sin(stroke.theta_s),
         -math.cos(stroke.theta_e) + math.cos(stroke.theta_s)]
    )


def target_points(model: SigmaLognormalModel) -> np.ndarray:
    """Virtual target point chain, shape (N + 1, 2); tp_0 is the origin."""
    tps = np.empty((len(model.strokes) + 1, 2))
    tps[0] = model.origin
    for j, s in enumerate(model.strokes, start=1):
        tps[j] = tps[j - 1] + stroke_chord(s)
    return tps


def synthesize_velocity(model: SigmaLognormalModel, times: np.ndarray) -> np.ndarray:
    """Planar velocity of the full model on the given grid, shape (n, 2)."""
    times = np.asarray(times, dtype=float)
    v = np.zeros((times.size, 2))
    for s in model.strokes:
        v += stroke_velocity(s, times)
    return v


def synthesize_trajectory(
    model: SigmaLognormalModel,
    times: np.ndarray,
    seg: SegmentationConfig | None = None,
) -> ReconstructedMovement:
    """Integrate the model analytically and package the reconstruction.

    The reported speed is the central difference of the synthesized points,
    matching how observed speed is computed, and the salient points are the
    velocity minima of that profile.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 3:
        raise ValueError("need at least 3 grid instants")
    dt = float(times[1] - times[0])
    pts = np.tile(np.asarray(model.origin, dtype=float), (times.size, 1))
    for s in model.strokes:
        pts = pts + stroke_displacement(s, times)
    traj = Trajectory(t0=float(times[0]), dt=dt, points=pts)
    speed = speed_profile(traj)
    minima = find_velocity_minima(speed, seg or SegmentationConfig(filter_enabled=False))
    idx = np.rint((minima - speed.t0) / dt).astype(int)
    sal = SalientPointSet(times=minima, points=pts[idx].copy(), indices=idx)
    return ReconstructedMovement(trajectory=traj, speed=speed, salient=sal)


def anchored_origin(
    strokes: tuple[LognormalStroke, ...], start_point: np.ndarray, t_start: float
) -> tuple[float, float]:
    """Origin that makes the synthesized curve pass through start_point at
    t_start."""
    shift = np.zeros(2)
    t = np.array([t_start])
    for s in strokes:
        shift += stroke_displacement(s, t)[0]
    origin = np.asarray(start_point, dtype=float) - shift
    return (float(origin[0]), float(origin[1]))
