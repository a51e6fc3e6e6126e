"""Iterative refinement of the action plan.

Interior target points are nudged toward the observed salient points by
the reconstruction error, stroke by stroke; after each nudge the affected
angles and amplitudes are recomputed from circles through the updated
target points and the fixed observed midpoints, and the movement is fully
re-synthesized. The best pass by trajectory SNR wins.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .geometry import ActionPlan, estimate_angles, stroke_amplitude, stroke_midpoints
from .metrics import snr_t, snr_v
from .model import (
    LognormalStroke,
    ReconstructedMovement,
    SigmaLognormalModel,
    anchored_origin,
    synthesize_trajectory,
)
from .segmentation import SalientPointSet, SegmentationConfig
from .signals import DiscretePath, SpeedProfile, Trajectory

logger = logging.getLogger(__name__)

# near-full-turn sweeps make the arc radius blow up; such an update is
# a sign of broken segmentation, not a better plan
_SWEEP_SANITY = 1.95 * np.pi


@dataclass(frozen=True)
class RefineConfig:
    eta: float = 1.0
    passes: int = 2
    stop_delta_db: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError("eta must lie in [0, 1]")
        if self.passes < 1:
            raise ValueError("passes must be at least 1")


@dataclass(frozen=True)
class PassRecord:
    index: int
    snr_t: float
    snr_v: float
    max_error: float


@dataclass(frozen=True)
class RefineTrace:
    records: tuple[PassRecord, ...]
    best_pass: int


def _matched_errors(observed: SalientPointSet, rec: SalientPointSet) -> np.ndarray:
    """Interior observed-minus-reconstructed offsets, paired by order."""
    obs_int = observed.points[1:-1]
    rec_int = rec.points[1:-1]
    m = min(obs_int.shape[0], rec_int.shape[0])
    if obs_int.shape[0] != rec_int.shape[0]:
        logger.debug(
            "salient count mismatch: %d observed vs %d reconstructed",
            obs_int.shape[0], rec_int.shape[0],
        )
    return obs_int[:m] - rec_int[:m]


def refine(
    model: SigmaLognormalModel,
    plan: ActionPlan,
    observed: SalientPointSet,
    path: DiscretePath,
    traj: Trajectory,
    speed: SpeedProfile,
    cfg: RefineConfig | None = None,
    seg: SegmentationConfig | None = None,
) -> tuple[ActionPlan, SigmaLognormalModel, RefineTrace]:
    """Run the refinement passes and return the best plan, model, trace.

    Kinematic parameters (t0, mu, sigma) are never touched; only target
    points, angles, and amplitudes move.
    """
    cfg = cfg or RefineConfig()
    n = plan.n_strokes
    if len(model.strokes) != n:
        raise ValueError("plan and model stroke counts differ")
    times = traj.times
    tps = plan.target_points.copy()
    angles = plan.angles.copy()
    amps = plan.amplitudes.copy()
    sp = observed.points
    mids = stroke_midpoints(observed, path)

    def rebuild() -> SigmaLognormalModel:
        strokes = tuple(
            replace(model.strokes[k], D=float(amps[k]),
                    theta_s=float(angles[k, 0]), theta_e=float(angles[k, 1]))
            for k in range(n)
        )
        origin = anchored_origin(strokes, tps[0], float(times[0]))
        return replace(model, origin=origin, strokes=strokes)

    cur = rebuild()
    rec = synthesize_trajectory(cur, times, seg)
    prev_db = snr_t(traj.points, rec.trajectory.points)

    records: list[PassRecord] = []
    snapshots: list[tuple[float, ActionPlan, SigmaLognormalModel]] = []
    for p in range(1, cfg.passes + 1):
        for j in range(1, n):
            errors = _matched_errors(observed, rec.salient)
            if j - 1 >= errors.shape[0]:
                logger.debug("pass %d: no reconstructed match for point %d", p, j)
                continue
            delta = cfg.eta * errors[j - 1]
            if delta[0] == 0.0 and delta[1] == 0.0:
                continue
            touched = [k for k in (j, j + 1) if 1 <= k <= n]
            undo = (tps[j].copy(), angles[[k - 1 for k in touched]].copy(),
                    amps[[k - 1 for k in touched]].copy())
            tps[j] += delta
            for k in touched:
                angles[k - 1] = estimate_angles(tps[k - 1], mids[k - 1], tps[k])
                amps[k - 1] = stroke_amplitude(tps[k - 1], tps[k], *angles[k - 1])
            if any(
                abs(angles[k - 1, 1] - angles[k - 1, 0]) > _SWEEP_SANITY for k in touched
            ):
                logger.warning(
                    "pass %d: update of target point %d makes a near-full-turn "
                    "sweep, reverting", p, j,
                )
                tps[j] = undo[0]
                angles[[k - 1 for k in touched]] = undo[1]
                amps[[k - 1 for k in touched]] = undo[2]
                continue
            cur = rebuild()
            rec = synthesize_trajectory(cur, times, seg)
        db = snr_t(traj.points, rec.trajectory.points)
        db_v = snr_v(speed.values, rec.speed.values)
        errors = _matched_errors(observed, rec.salient)
        max_err = float(np.max(np.hypot(errors[:, 0], errors[:, 1]))) if errors.size else 0.0
        records.append(PassRecord(index=p, snr_t=db, snr_v=db_v, max_error=max_err))
        snapshots.append(
            (db, ActionPlan(tps.copy(), angles.copy(), amps.copy()), cur)
        )
        if db - prev_db < cfg.stop_delta_db:
            break
        prev_db = db

    best = int(np.argmax([s[0] for s in snapshots]))
    _, best_plan, best_model = snapshots[best]
    trace = RefineTrace(records=tuple(records), best_pass=best + 1)
    return best_plan, best_model, trace


def reconstruct(
    model: SigmaLognormalModel, times: np.ndarray, seg: SegmentationConfig | None = None
) -> ReconstructedMovement:
    """Convenience wrapper around the forward synthesis."""
    return synthesize_trajectory(model, times, seg)
