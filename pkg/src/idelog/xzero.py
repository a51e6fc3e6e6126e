"""Velocity-domain baseline extractor.

Greedy peak-by-peak decomposition of a speed profile: each lobe's
lognormal parameters come from closed-form identities at three
characteristic points, the stroke is subtracted, and the loop repeats
until the reconstruction is good enough or no usable peaks remain.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import erf

from .model import (
    SQRT2PI,
    LognormalStroke,
    SigmaLognormalModel,
    anchored_origin,
    lognormal_pdf,
)
from .signals import SpeedProfile, Trajectory

logger = logging.getLogger(__name__)

_COMBOS = ((2, 3), (2, 4), (3, 4))


class NoLognormalFitError(RuntimeError):
    """No characteristic-point combination produced a valid lognormal."""


@dataclass(frozen=True)
class XZeroConfig:
    snr_target: float = 30.0
    max_strokes: int | None = None
    min_stroke_area: float = 0.01
    min_peak: float = 0.02
    mu_bounds: tuple[float, float] = (-4.0, 2.0)
    sigma_bounds: tuple[float, float] = (0.05, 0.8)


@dataclass(frozen=True)
class CharacteristicPoints:
    """Support (t1, t5), inflections (t2, t4) and peak (t3) of one lobe."""

    times: np.ndarray
    speeds: np.ndarray
    indices: np.ndarray

    @property
    def t2(self) -> float:
        return float(self.times[1])

    @property
    def t3(self) -> float:
        return float(self.times[2])

    @property
    def t4(self) -> float:
        return float(self.times[3])


@dataclass(frozen=True)
class StrokeEstimate:
    combo: tuple[int, int]
    t0: float
    mu: float
    sigma: float
    D: float
    error: float


def a_coefficient(sigma: float, i: int) -> float:
    """Log-time offset of characteristic point i for a given sigma."""
    s2 = sigma * sigma
    root = sigma * math.sqrt(0.25 * s2 + 1.0)
    if i == 2:
        return 1.5 * s2 + root
    if i == 3:
        return s2
    if i == 4:
        return 1.5 * s2 - root
    raise ValueError("characteristic index must be 2, 3 or 4")


def _sigma_squared(combo: tuple[int, int], v: dict[int, float]) -> float:
    if combo == (2, 3):
        ln_r = math.log(v[2] / v[3])
        return -2.0 - 2.0 * ln_r - 1.0 / (2.0 * ln_r)
    if combo == (2, 4):
        ln_r = math.log(v[2] / v[4])
        return -2.0 + 2.0 * math.sqrt(1.0 + ln_r * ln_r)
    if combo == (3, 4):
        ln_r = math.log(v[4] / v[3])
        return -2.0 - 2.0 * ln_r - 1.0 / (2.0 * ln_r)
    raise ValueError(f"unknown combination {combo}")


def estimate_candidates(points: CharacteristicPoints) -> list[StrokeEstimate]:
    """Closed-form (t0, mu, sigma, D) from each point combination.

    Invalid combinations (non-positive sigma^2, undefined logs) are
    dropped; the error is the squared speed mismatch at the three points.
    """
    t = {2: points.t2, 3: points.t3, 4: points.t4}
    v = {2: float(points.speeds[0]), 3: float(points.speeds[1]), 4: float(points.speeds[2])}
    if min(v.values()) <= 0.0 or v[3] <= max(v[2], v[4]):
        return []
    out = []
    for alpha, beta in _COMBOS:
        try:
            s2 = _sigma_squared((alpha, beta), v)
            if not math.isfinite(s2) or s2 <= 0.0:
                continue
            sigma = math.sqrt(s2)
            a_a = a_coefficient(sigma, alpha)
            a_b = a_coefficient(sigma, beta)
            ratio = (t[alpha] - t[beta]) / (math.exp(-a_a) - math.exp(-a_b))
            if not math.isfinite(ratio) or ratio <= 0.0:
                continue
            mu = math.log(ratio)
            t0 = t[alpha] - math.exp(mu - a_a)
            D = v[alpha] * sigma * SQRT2PI * math.exp(mu + a_a * a_a / (2.0 * s2) - a_a)
        except (ValueError, ZeroDivisionError, OverflowError):
            continue
        if not (math.isfinite(t0) and math.isfinite(D) and D > 0.0):
            continue
        times = np.array([t[2], t[3], t[4]])
        pred = D * lognormal_pdf(times, t0, mu, sigma)
        err = float(np.sum((pred - np.array([v[2], v[3], v[4]])) ** 2))
        out.append(StrokeEstimate(combo=(alpha, beta), t0=t0, mu=mu, sigma=sigma, D=D, error=err))
    return out


def estimate_stroke(points: CharacteristicPoints) -> StrokeEstimate:
    """Best candidate by least-squares error at the characteristic points."""
    cands = estimate_candidates(points)
    if not cands:
        raise NoLognormalFitError("no valid characteristic-point combination")
    return min(cands, key=lambda c: c.error)


def completed_distance(D: float, sigma: float, i: int) -> float:
    """Distance covered along the stroke at characteristic point i."""
    if i == 1:
        return 0.0
    if i == 5:
        return D
    a_i = a_coefficient(sigma, i)
    return 0.5 * D * (1.0 + erf(-a_i / (sigma * math.sqrt(2.0))))


def _wrap(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def xzero_angles(
    est: StrokeEstimate, phi2: float, phi3: float, phi4: float
) -> tuple[float, float]:
    """Start/end angles from trajectory directions at the characteristic
    points, assuming the tangent angle varies linearly with distance."""
    d2 = completed_distance(est.D, est.sigma, 2)
    d3 = completed_distance(est.D, est.sigma, 3)
    d4 = completed_distance(est.D, est.sigma, 4)
    if d4 - d2 <= 0.0:
        return phi3, phi3
    dphi = _wrap(phi4 - phi2) / (d4 - d2)
    theta_s = phi3 - dphi * d3
    theta_e = phi3 + dphi * (est.D - d3)
    return theta_s, theta_e


def _local_minimum_left(w: np.ndarray, i: int) -> int:
    j = i
    while j > 0 and w[j - 1] <= w[j]:
        j -= 1
    return j


def _local_minimum_right(w: np.ndarray, i: int) -> int:
    j = i
    n = w.size
    while j < n - 1 and w[j + 1] <= w[j]:
        j += 1
    return j


def _support_edge(w: np.ndarray, start: int, floor: float, step: int) -> int:
    j = start
    n = w.size
    while 0 < j < n - 1 and w[j] > floor:
        j += step
    return j


def _parabolic_offset(y0: float, y1: float, y2: float) -> float:
    # sub-sample offset of the extremum of the parabola through three
    # equally spaced samples, clipped to one sample either side
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return 0.0
    return float(np.clip(0.5 * (y0 - y2) / denom, -1.0, 1.0))


def _parabolic_value(y0: float, y1: float, y2: float, d: float) -> float:
    a = 0.5 * (y0 - 2.0 * y1 + y2)
    b = 0.5 * (y2 - y0)
    return y1 + b * d + a * d * d


def characteristic_points(
    w: np.ndarray, peak: int, t0_grid: float, dt: float, floor: float
) -> CharacteristicPoints:
    """Locate p1..p5 around a peak of the working profile.

    p2 and p4 sit at the lobe's inflection points (the extrema of dv/dt
    on either flank), which is where the closed-form identities place
    them for an exact lognormal. Their times and speeds, and the peak's,
    are refined to sub-sample precision with parabolic interpolation;
    the identities are sensitive to the small time differences involved.
    """
    n = w.size
    lo = _local_minimum_left(w, peak)
    hi = _local_minimum_right(w, peak)
    i1 = _support_edge(w, lo, floor, -1)
    i5 = _support_edge(w, hi, floor, +1)
    g = np.gradient(w, dt)
    i2 = lo + int(np.argmax(g[lo:peak])) if peak > lo else lo
    i4 = peak + int(np.argmin(g[peak : hi + 1])) if hi > peak else hi
    idx = np.array([i1, i2, peak, i4, i5])
    times = t0_grid + idx.astype(float) * dt
    speeds = w[[i2, peak, i4]].astype(float)
    if 0 < peak < n - 1:
        d = _parabolic_offset(w[peak - 1], w[peak], w[peak + 1])
        times[2] = t0_grid + (peak + d) * dt
        speeds[1] = _parabolic_value(w[peak - 1], w[peak], w[peak + 1], d)
    if 0 < i2 < n - 1:
        d = _parabolic_offset(g[i2 - 1], g[i2], g[i2 + 1])
        times[1] = t0_grid + (i2 + d) * dt
        speeds[0] = _parabolic_value(w[i2 - 1], w[i2], w[i2 + 1], d)
    if 0 < i4 < n - 1:
        d = _parabolic_offset(g[i4 - 1], g[i4], g[i4 + 1])
        times[3] = t0_grid + (i4 + d) * dt
        speeds[2] = _parabolic_value(w[i4 - 1], w[i4], w[i4 + 1], d)
    if not (times[1] < times[2] < times[3]):
        times = t0_grid + idx.astype(float) * dt
        speeds = w[[i2, peak, i4]].astype(float)
    return CharacteristicPoints(times=times, speeds=speeds, indices=idx)


def _repick(
    points: CharacteristicPoints, w: np.ndarray, t0_grid: float, dt: float, mode: str
) -> CharacteristicPoints:
    # alternative flank points at half or double the distance from the peak
    i1, i2, i3, i4, i5 = (int(k) for k in points.indices)
    n = w.size
    if mode == "half":
        i2b = i3 - max((i3 - i2) // 2, 1) if i3 - i2 > 1 else i2
        i4b = i3 + max((i4 - i3) // 2, 1) if i4 - i3 > 1 else i4
    else:
        i2b = max(i3 - 2 * (i3 - i2), 0)
        i4b = min(i3 + 2 * (i4 - i3), n - 1)
    idx = np.array([i1, i2b, i3, i4b, i5])
    return CharacteristicPoints(
        times=t0_grid + idx * dt,
        speeds=w[[i2b, i3, i4b]].astype(float),
        indices=idx,
    )


def _in_bounds(est: StrokeEstimate, cfg: XZeroConfig) -> bool:
    return (
        cfg.mu_bounds[0] <= est.mu <= cfg.mu_bounds[1]
        and cfg.sigma_bounds[0] <= est.sigma <= cfg.sigma_bounds[1]
    )


def _direction_profile(traj: Trajectory) -> np.ndarray:
    vx = np.gradient(traj.points[:, 0], traj.dt)
    vy = np.gradient(traj.points[:, 1], traj.dt)
    return np.arctan2(vy, vx)


def _best_valid(points: CharacteristicPoints, cfg: XZeroConfig) -> StrokeEstimate | None:
    cands = [c for c in estimate_candidates(points) if _in_bounds(c, cfg)]
    return min(cands, key=lambda c: c.error) if cands else None


def _fit_peak(
    w: np.ndarray, peak: int, t0_grid: float, dt: float, floor: float, cfg: XZeroConfig
) -> tuple[StrokeEstimate | None, CharacteristicPoints]:
    """Estimate one lobe, re-picking the flank points at half and then
    double the distance from the peak before giving up."""
    points = characteristic_points(w, peak, t0_grid, dt, floor)
    i2, i4 = int(points.indices[1]), int(points.indices[3])
    if not (i2 < peak < i4):
        return None, points
    est = _best_valid(points, cfg)
    if est is None:
        for mode in ("half", "double"):
            redo = _repick(points, w, t0_grid, dt, mode)
            est = _best_valid(redo, cfg)
            if est is not None:
                return est, redo
    return est, points


def extract_all(
    profile: SpeedProfile, traj: Trajectory, cfg: XZeroConfig | None = None
) -> SigmaLognormalModel:
    """Run the subtract-and-repeat loop over the whole profile.

    A flat profile, or one where no peak yields an acceptable stroke,
    produces a model with zero strokes rather than an error.
    """
    from .segmentation import SegmentationConfig, find_velocity_minima

    cfg = cfg or XZeroConfig()
    v_obs = np.asarray(profile.values, dtype=float)
    times = profile.times
    dt = profile.dt
    duration = max(float(times[-1]), dt)
    origin0 = (float(traj.points[0, 0]), float(traj.points[0, 1]))
    total_area = float(trapezoid(v_obs, dx=dt))
    global_peak = float(np.max(v_obs))
    if global_peak <= 0.0 or total_area <= 0.0:
        return SigmaLognormalModel(origin=origin0, duration=duration, strokes=())
    max_strokes = cfg.max_strokes
    if max_strokes is None:
        n_lobes = find_velocity_minima(profile, SegmentationConfig()).size - 1
        max_strokes = 2 * max(n_lobes, 1)

    phi = _direction_profile(traj)
    floor = cfg.min_peak * global_peak
    w = v_obs.copy()
    blocked = np.zeros_like(w, dtype=bool)
    strokes: list[LognormalStroke] = []
    v_rec = np.zeros_like(w)
    snr_series: list[float] = []

    while len(strokes) < max_strokes:
        work = np.where(blocked, -np.inf, w)
        peak = int(np.argmax(work))
        if not (work[peak] > floor):
            break
        est, points = _fit_peak(w, peak, float(times[0]), dt, floor, cfg)
        peak_value = (
            est.D * math.exp(0.5 * est.sigma**2 - est.mu) / (est.sigma * SQRT2PI)
            if est is not None
            else 0.0
        )
        if (
            est is None
            or est.D < cfg.min_stroke_area * total_area
            or peak_value < floor
        ):
            lo, hi = int(points.indices[1]), int(points.indices[3])
            blocked[lo : hi + 1] = True
            blocked[peak] = True
            logger.debug("rejected peak at t=%.3f", times[peak])
            continue
        p_idx = points.indices
        theta_s, theta_e = xzero_angles(
            est, float(phi[p_idx[1]]), float(phi[p_idx[2]]), float(phi[p_idx[3]])
        )
        strokes.append(
            LognormalStroke(
                D=est.D, t0=est.t0, mu=est.mu, sigma=est.sigma,
                theta_s=theta_s, theta_e=theta_e,
            )
        )
        contrib = est.D * lognormal_pdf(times, est.t0, est.mu, est.sigma)
        v_rec += contrib
        w = np.maximum(w - contrib, 0.0)
        noise = float(np.sum((v_obs - v_rec) ** 2))
        snr = 120.0 if noise <= 0.0 else 10.0 * math.log10(float(np.sum(v_obs**2)) / noise)
        snr_series.append(snr)
        if snr >= cfg.snr_target:
            break

    if not strokes:
        return SigmaLognormalModel(origin=origin0, duration=duration, strokes=())
    strokes.sort(key=lambda s: s.t0)
    origin = anchored_origin(tuple(strokes), traj.points[0], float(times[0]))
    return SigmaLognormalModel(
        origin=origin,
        duration=duration,
        strokes=tuple(strokes),
        meta={"snr_series": snr_series},
    )
