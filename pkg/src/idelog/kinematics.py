"""Kinematic parameter extraction.

Each velocity lobe is normalized to unit area and fit with a lognormal in
(mu, sigma) by damped Gauss-Newton with analytic derivatives; the onset t0
is fixed half a second before the lobe's left boundary.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .model import lognormal_pdf
from .segmentation import VelocityLobe

logger = logging.getLogger(__name__)


class EmptyLobeError(ValueError):
    """Raised for a lobe whose area is zero (no movement to fit)."""


@dataclass(frozen=True)
class KinematicConfig:
    delay: float = 0.5
    sigma_bounds: tuple[float, float] = (0.01, 1.5)
    mu_bounds: tuple[float, float] = (-4.0, 2.0)
    sigma_init: float = 0.2
    max_iterations: int = 200
    gradient_tol: float = 1e-10
    step_tol: float = 1e-12
    damping_init: float = 1e-3


@dataclass(frozen=True)
class KinematicFit:
    stroke_index: int
    t0: float
    mu: float
    sigma: float
    residual: float
    iterations_used: int
    converged: bool


def estimate_t0(t_min_prev: float, delay: float = 0.5) -> float:
    """Stroke onset: a fixed delay before the previous velocity minimum."""
    return t_min_prev - delay


def lobe_area(lobe: VelocityLobe) -> float:
    window = lobe.samples[lobe.start_index : lobe.end_index + 1]
    return float(trapezoid(window, dx=lobe.dt))


def normalize_lobe(lobe: VelocityLobe) -> np.ndarray:
    """Scale the lobe window to unit area. Zero-area lobes are an error."""
    area = lobe_area(lobe)
    if area <= 0.0:
        raise EmptyLobeError(f"lobe {lobe.stroke_index} has zero area")
    return lobe.samples[lobe.start_index : lobe.end_index + 1] / area


def _clip(mu: float, sigma: float, cfg: KinematicConfig) -> tuple[float, float]:
    return (
        min(max(mu, cfg.mu_bounds[0]), cfg.mu_bounds[1]),
        min(max(sigma, cfg.sigma_bounds[0]), cfg.sigma_bounds[1]),
    )


def _jacobian(t: np.ndarray, t0: float, mu: float, sigma: float) -> np.ndarray:
    lam = lognormal_pdf(t, t0, mu, sigma)
    z = np.zeros_like(t)
    m = t > t0
    z[m] = (np.log(t[m] - t0) - mu) / sigma
    return np.column_stack([lam * z / sigma, lam * (z * z - 1.0) / sigma])


def fit_mu_sigma(
    times: np.ndarray,
    values: np.ndarray,
    t0: float,
    cfg: KinematicConfig | None = None,
    init: tuple[float, float] | None = None,
    stroke_index: int = 0,
) -> KinematicFit:
    """Least-squares lognormal fit of a unit-area lobe with t0 held fixed.

    Damped Gauss-Newton: the damping starts at cfg.damping_init, divides by
    10 on an accepted step and multiplies by 10 on a rejected one; steps are
    clamped to the (mu, sigma) bounds.
    """
    cfg = cfg or KinematicConfig()
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    dt = float(t[1] - t[0]) if t.size > 1 else 1.0

    if init is None:
        t_peak = float(t[np.argmax(v)])
        mu = math.log(max(t_peak - t0, 1e-3))
        sigma = cfg.sigma_init
    else:
        mu, sigma = init
    mu, sigma = _clip(mu, sigma, cfg)

    def objective(m: float, s: float) -> tuple[float, np.ndarray]:
        r = lognormal_pdf(t, t0, m, s) - v
        return float(np.sum(r * r) * dt), r

    obj, r = objective(mu, sigma)
    lam = cfg.damping_init
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        J = _jacobian(t, t0, mu, sigma)
        g = 2.0 * (J.T @ r) * dt
        if np.linalg.norm(g) < cfg.gradient_tol:
            converged = True
            break
        A = J.T @ J
        diag = np.diag(np.maximum(np.diag(A), 1e-12))
        try:
            step = np.linalg.solve(A + lam * diag, -(J.T @ r))
        except np.linalg.LinAlgError:
            converged = False
            break
        mu_new, sigma_new = _clip(mu + step[0], sigma + step[1], cfg)
        obj_new, r_new = objective(mu_new, sigma_new)
        if obj_new < obj:
            moved = math.hypot(mu_new - mu, sigma_new - sigma)
            mu, sigma, obj, r = mu_new, sigma_new, obj_new, r_new
            lam = max(lam / 10.0, 1e-12)
            if moved < cfg.step_tol:
                converged = True
                break
        else:
            lam *= 10.0
            if lam > 1e12:
                break
    else:
        it = cfg.max_iterations

    return KinematicFit(
        stroke_index=stroke_index,
        t0=t0,
        mu=mu,
        sigma=sigma,
        residual=obj,
        iterations_used=it,
        converged=converged,
    )


def fit_lobe(
    lobe: VelocityLobe,
    t_min_prev: float,
    cfg: KinematicConfig | None = None,
) -> KinematicFit:
    """Normalize one lobe and fit (mu, sigma) on its window."""
    cfg = cfg or KinematicConfig()
    t0 = estimate_t0(t_min_prev, cfg.delay)
    v_norm = normalize_lobe(lobe)
    grid0 = lobe.t_start - lobe.start_index * lobe.dt
    times = grid0 + np.arange(lobe.start_index, lobe.end_index + 1) * lobe.dt
    return fit_mu_sigma(times, v_norm, t0, cfg, stroke_index=lobe.stroke_index)
