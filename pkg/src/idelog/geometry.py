"""Spatial parameter extraction.

Places virtual target points from the salient points, fits circular arcs
through salient/mid points to get start and end angles, and derives stroke
amplitudes from the arc geometry.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .model import ANGLE_EPS
from .segmentation import SalientPointSet
from .signals import DiscretePath, path_midpoint

logger = logging.getLogger(__name__)

_COLLINEAR_TOL = 1e-9
_AMPLITUDE_FLOOR = 1e-9


@dataclass(frozen=True)
class ActionPlan:
    """Virtual target points plus per-stroke angle pairs and amplitudes."""

    target_points: np.ndarray
    angles: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        n = self.amplitudes.shape[0]
        if self.target_points.shape != (n + 1, 2) or self.angles.shape != (n, 2):
            raise ValueError("inconsistent plan shapes")

    @property
    def n_strokes(self) -> int:
        return int(self.amplitudes.shape[0])


def initial_target_point(
    sp_prev: np.ndarray, sp_j: np.ndarray, sp_next: np.ndarray
) -> np.ndarray:
    """First guess for an interior target point.

    The point sits on the median from the corner sp_j to the midpoint of
    its neighbours, pushed out by half of (1 + cos(aperture / 2)).
    """
    sp_prev = np.asarray(sp_prev, dtype=float)
    sp_j = np.asarray(sp_j, dtype=float)
    sp_next = np.asarray(sp_next, dtype=float)
    mid = 0.5 * (sp_prev + sp_next)
    htp = float(np.linalg.norm(mid - sp_j))
    if htp == 0.0:
        return sp_j.copy()
    u1 = sp_prev - sp_j
    u2 = sp_next - sp_j
    n1, n2 = np.linalg.norm(u1), np.linalg.norm(u2)
    if n1 == 0.0 or n2 == 0.0:
        return sp_j.copy()
    aperture = math.acos(float(np.clip(u1 @ u2 / (n1 * n2), -1.0, 1.0)))
    ltp = htp * (1.0 + math.cos(0.5 * aperture)) / 2.0
    return sp_j + ltp * (mid - sp_j) / htp


def circle_through(
    p1: np.ndarray, p2: np.ndarray, p3: np.ndarray
) -> tuple[np.ndarray, float] | None:
    """Center and radius of the circle through three points, or None if
    they are collinear."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    p3 = np.asarray(p3, dtype=float)
    a = p2 - p1
    b = p3 - p1
    cross = a[0] * b[1] - a[1] * b[0]
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1.0)
    if abs(cross) <= _COLLINEAR_TOL * scale * scale:
        return None
    # perpendicular bisector intersection
    mat = np.array([a, b])
    rhs = 0.5 * np.array([a @ a, b @ b])
    center = p1 + np.linalg.solve(mat, rhs)
    return center, float(np.linalg.norm(p1 - center))


def _wrap(angle: float) -> float:
    return math.atan2(math.sin(angle), math.cos(angle))


def estimate_angles(
    sp_prev: np.ndarray, mp: np.ndarray, sp_j: np.ndarray
) -> tuple[float, float]:
    """Start/end tangent angles of the arc through three ordered points.

    Tangents are oriented along the direction of travel (positive dot
    product with the local chord); collinear points give a straight stroke
    with equal angles. The sweep theta_e - theta_s keeps the turning sign.
    """
    sp_prev = np.asarray(sp_prev, dtype=float)
    mp = np.asarray(mp, dtype=float)
    sp_j = np.asarray(sp_j, dtype=float)
    fit = circle_through(sp_prev, mp, sp_j)
    if fit is None:
        theta = math.atan2(sp_j[1] - sp_prev[1], sp_j[0] - sp_prev[0])
        return theta, theta
    center, _ = fit
    a_p = math.atan2(sp_prev[1] - center[1], sp_prev[0] - center[0])
    a_m = math.atan2(mp[1] - center[1], mp[0] - center[0])
    a_j = math.atan2(sp_j[1] - center[1], sp_j[0] - center[0])
    ccw = (a_j - a_p) % (2.0 * math.pi)
    ccw_mid = (a_m - a_p) % (2.0 * math.pi)
    sweep = ccw if ccw_mid <= ccw else ccw - 2.0 * math.pi
    theta_s = _wrap(a_p + math.copysign(0.5 * math.pi, sweep))
    return theta_s, theta_s + sweep


def stroke_amplitude(
    tp_prev: np.ndarray, tp_j: np.ndarray, theta_s: float, theta_e: float
) -> float:
    """Arc length between consecutive target points for the given angles.

    The arc center is where the normals at the two target points meet; a
    near-zero sweep degenerates to the chord length.
    """
    tp_prev = np.asarray(tp_prev, dtype=float)
    tp_j = np.asarray(tp_j, dtype=float)
    chord = float(np.linalg.norm(tp_j - tp_prev))
    sweep = theta_e - theta_s
    if abs(sweep) < ANGLE_EPS:
        return max(chord, _AMPLITUDE_FLOOR)
    if chord == 0.0:
        logger.warning("coincident target points with nonzero sweep")
        return _AMPLITUDE_FLOOR
    sin_sweep = math.sin(sweep)
    if abs(sin_sweep) < 1e-9:
        # normals are parallel (half-turn); radius from the chord instead
        half = abs(math.sin(0.5 * sweep))
        r = chord / (2.0 * half) if half > 1e-9 else chord
    else:
        n_s = np.array([-math.sin(theta_s), math.cos(theta_s)])
        n_e = np.array([-math.sin(theta_e), math.cos(theta_e)])
        mat = np.column_stack([n_s, -n_e])
        ab = np.linalg.solve(mat, tp_j - tp_prev)
        r = abs(float(ab[0]))
    return max(r * abs(sweep), _AMPLITUDE_FLOOR)


def stroke_midpoints(salient: SalientPointSet, path: DiscretePath) -> np.ndarray:
    """Arc-length midpoint on the ink between consecutive salient points."""
    anchors = path.sample_anchor[salient.indices]
    return np.array(
        [path_midpoint(path, int(anchors[j - 1]), int(anchors[j]))
         for j in range(1, len(salient))]
    )


def build_action_plan(salient: SalientPointSet, path: DiscretePath) -> ActionPlan:
    """Initial target points, angles, and amplitudes from the salient set."""
    n = len(salient) - 1
    if n < 1:
        raise ValueError("need at least two salient points")
    sp = salient.points
    tps = np.empty((n + 1, 2))
    tps[0] = sp[0]
    tps[n] = sp[n]
    for j in range(1, n):
        tps[j] = initial_target_point(sp[j - 1], sp[j], sp[j + 1])
    mids = stroke_midpoints(salient, path)
    angles = np.empty((n, 2))
    amps = np.empty(n)
    for j in range(1, n + 1):
        angles[j - 1] = estimate_angles(sp[j - 1], mids[j - 1], sp[j])
        amps[j - 1] = stroke_amplitude(tps[j - 1], tps[j], *angles[j - 1])
    return ActionPlan(target_points=tps, angles=angles, amplitudes=amps)
