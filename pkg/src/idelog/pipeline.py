"""End-to-end decomposition pipeline.

Conditioning, segmentation, kinematic fits, spatial extraction, and
refinement wired together, with a velocity-domain baseline extractor as an
alternative back end.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import xzero as xz
from .geometry import ActionPlan, build_action_plan
from .kinematics import KinematicConfig, fit_lobe, lobe_area
from .metrics import ReconstructionReport, build_report
from .model import (
    LognormalStroke,
    ReconstructedMovement,
    SigmaLognormalModel,
    anchored_origin,
    check_truncation,
    synthesize_trajectory,
)
from .refine import RefineConfig, RefineTrace, refine
from .segmentation import (
    SalientPointSet,
    SegmentationConfig,
    extract_lobes,
    find_velocity_minima,
    locate_salient_points,
)
from .signals import (
    DiscretePath,
    RawSignature,
    SmoothConfig,
    SpeedProfile,
    Trajectory,
    eight_connected,
    resample,
    smooth,
    speed_profile,
)

logger = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    """Failure wrapped with the pipeline stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


def _default_segmentation() -> SegmentationConfig:
    # ripple and edge-fragment suppression on by default in the pipeline
    return SegmentationConfig(
        filter_enabled=True, min_prominence=0.02, min_lobe_duration=0.05
    )


@dataclass(frozen=True)
class PipelineConfig:
    extractor: str = "idelog"
    target_rate: float = 200.0
    grid_scale: float = 1.0
    smoothing: SmoothConfig = field(default_factory=SmoothConfig)
    segmentation: SegmentationConfig = field(default_factory=_default_segmentation)
    kinematic: KinematicConfig = field(default_factory=KinematicConfig)
    refinement: RefineConfig = field(default_factory=RefineConfig)
    baseline: xz.XZeroConfig = field(default_factory=xz.XZeroConfig)

    def __post_init__(self) -> None:
        if self.extractor not in ("idelog", "xzero"):
            raise ValueError(f"unknown extractor {self.extractor!r}")


@dataclass(frozen=True)
class DecompositionResult:
    model: SigmaLognormalModel
    plan: ActionPlan | None
    report: ReconstructionReport
    initial_report: ReconstructionReport | None
    trace: RefineTrace | None
    config_digest: str
    trajectory: Trajectory
    speed: SpeedProfile
    path: DiscretePath
    salient: SalientPointSet | None
    movement: ReconstructedMovement


def config_digest(cfg: PipelineConfig) -> str:
    """Stable hash of the full configuration."""
    blob = json.dumps(dataclasses.asdict(cfg), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


_SECTIONS = {
    "smoothing": SmoothConfig,
    "segmentation": SegmentationConfig,
    "kinematic": KinematicConfig,
    "refinement": RefineConfig,
    "baseline": xz.XZeroConfig,
}


def config_from_dict(d: dict) -> PipelineConfig:
    """Build a config from nested dicts (the JSON config file layout)."""
    top = {f.name for f in dataclasses.fields(PipelineConfig)}
    kwargs = {}
    for key, value in d.items():
        if key in _SECTIONS:
            cls = _SECTIONS[key]
            names = {f.name for f in dataclasses.fields(cls)}
            unknown = sorted(set(value) - names)
            if unknown:
                raise ValueError(f"unknown keys in {key!r}: {unknown}")
            coerced = {
                k: tuple(v) if isinstance(v, list) else v for k, v in value.items()
            }
            kwargs[key] = cls(**coerced)
        elif key in top:
            kwargs[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    return PipelineConfig(**kwargs)


def _stage(name: str):
    def deco(fn):
        def wrapped(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except PipelineError:
                raise
            except Exception as e:
                raise PipelineError(name, e) from e
        return wrapped
    return deco


def _drop_empty_lobes(
    minima: np.ndarray, profile: SpeedProfile
) -> np.ndarray:
    """Remove boundaries of zero-area lobes, merging them into a neighbor."""
    while minima.size > 2:
        lobes = extract_lobes(profile, minima)
        empty = [k for k, lb in enumerate(lobes) if lobe_area(lb) <= 0.0]
        if not empty:
            break
        k = empty[0]
        drop = k + 1 if k + 1 < minima.size - 1 else k
        logger.info("merging zero-area stroke window %d", k + 1)
        minima = np.delete(minima, drop)
    return minima


def decompose(raw: RawSignature, cfg: PipelineConfig | None = None) -> DecompositionResult:
    """Full decomposition of one captured signature."""
    cfg = cfg or PipelineConfig()
    digest = config_digest(cfg)

    traj_raw = _stage("resample")(resample)(raw, cfg.target_rate)
    # time measured from the first sample so stored models are grid-free
    traj_raw = Trajectory(t0=0.0, dt=traj_raw.dt, points=traj_raw.points)
    traj = _stage("smooth")(smooth)(traj_raw, cfg.smoothing)
    v = _stage("speed")(speed_profile)(traj)
    path = _stage("rasterize")(eight_connected)(traj, cfg.grid_scale)

    if cfg.extractor == "xzero":
        model = _stage("baseline")(xz.extract_all)(v, traj, cfg.baseline)
        movement = _stage("reconstruct")(synthesize_trajectory)(
            model, traj.times, cfg.segmentation
        )
        report = build_report(model, traj, v, movement, cfg.smoothing.enabled)
        model = dataclasses.replace(
            model,
            meta={**model.meta, "provenance": {
                "source": raw.source_id, "extractor": cfg.extractor, "config": digest,
            }},
        )
        return DecompositionResult(
            model=model, plan=None, report=report, initial_report=None,
            trace=None, config_digest=digest, trajectory=traj, speed=v,
            path=path, salient=None, movement=movement,
        )

    minima = _stage("segmentation")(find_velocity_minima)(v, cfg.segmentation)
    minima = _stage("segmentation")(_drop_empty_lobes)(minima, v)
    salient = _stage("segmentation")(locate_salient_points)(minima, traj, path)
    lobes = _stage("segmentation")(extract_lobes)(v, minima)

    fit_stage = _stage("kinematics")(fit_lobe)
    fits = [fit_stage(lobe, lobe.t_start, cfg.kinematic) for lobe in lobes]

    plan = _stage("geometry")(build_action_plan)(salient, path)
    strokes = tuple(
        LognormalStroke(
            D=float(plan.amplitudes[k]),
            t0=fits[k].t0,
            mu=fits[k].mu,
            sigma=fits[k].sigma,
            theta_s=float(plan.angles[k, 0]),
            theta_e=float(plan.angles[k, 1]),
        )
        for k in range(plan.n_strokes)
    )
    duration = float(traj.times[-1])
    origin = anchored_origin(strokes, salient.points[0], float(traj.times[0]))
    model0 = SigmaLognormalModel(origin=origin, duration=duration, strokes=strokes)
    movement0 = _stage("reconstruct")(synthesize_trajectory)(
        model0, traj.times, cfg.segmentation
    )
    initial_report = build_report(model0, traj, v, movement0, cfg.smoothing.enabled)

    # refinement matches salient points against a noise-free reconstruction,
    # so its internal re-detection runs unfiltered (seg=None)
    plan, model, trace = _stage("refinement")(refine)(
        model0, plan, salient, path, traj, v, cfg.refinement, None
    )
    movement = _stage("reconstruct")(synthesize_trajectory)(model, traj.times, cfg.segmentation)
    report = build_report(model, traj, v, movement, cfg.smoothing.enabled)
    check_truncation(model, raw.source_id or "decomposition")
    model = dataclasses.replace(
        model,
        meta={**model.meta, "provenance": {
            "source": raw.source_id, "extractor": cfg.extractor, "config": digest,
        }},
    )
    return DecompositionResult(
        model=model, plan=plan, report=report, initial_report=initial_report,
        trace=trace, config_digest=digest, trajectory=traj, speed=v,
        path=path, salient=salient, movement=movement,
    )
