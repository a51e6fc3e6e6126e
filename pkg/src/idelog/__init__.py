"""Sigma-lognormal decomposition of pen trajectories.

Extracts stroke-level motor models from captured handwriting: a kinematic
pass fits lognormal speed lobes, a spatial pass places virtual target
points and arc angles on the ink, and an iterative loop refines the
target points until the reconstruction tracks the observed movement.
"""

from .geometry import ActionPlan, build_action_plan
from .kinematics import KinematicConfig, KinematicFit, fit_lobe, fit_mu_sigma
from .metrics import ReconstructionReport, build_report, snr_t, snr_v
from .model import (
    LognormalStroke,
    ReconstructedMovement,
    SigmaLognormalModel,
    synthesize_trajectory,
    synthesize_velocity,
    target_points,
    time_grid,
)
from .pipeline import (
    DecompositionResult,
    PipelineConfig,
    PipelineError,
    decompose,
)
from .refine import RefineConfig, RefineTrace, refine
from .segmentation import (
    SalientPointSet,
    SegmentationConfig,
    VelocityLobe,
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
    path_midpoint,
    resample,
    smooth,
    speed_profile,
)
from .verification import (
    DETCurve,
    FeatureSequence,
    ScoreSet,
    det_area_gap,
    det_curve,
    dtw_distance,
    equal_error_rate,
    evaluate_protocol,
    signature_features,
)
from .xzero import (
    CharacteristicPoints,
    NoLognormalFitError,
    XZeroConfig,
    estimate_stroke,
    extract_all,
)

__version__ = "0.1.0"

__all__ = [
    "ActionPlan", "CharacteristicPoints", "DETCurve", "DecompositionResult",
    "DiscretePath", "FeatureSequence", "KinematicConfig", "KinematicFit",
    "LognormalStroke", "NoLognormalFitError", "PipelineConfig", "PipelineError",
    "RawSignature", "ReconstructedMovement", "ReconstructionReport",
    "RefineConfig", "RefineTrace", "SalientPointSet", "ScoreSet",
    "SegmentationConfig", "SigmaLognormalModel", "SmoothConfig", "SpeedProfile",
    "Trajectory", "VelocityLobe", "XZeroConfig", "build_action_plan",
    "build_report", "decompose", "det_area_gap", "det_curve", "dtw_distance",
    "eight_connected", "equal_error_rate", "estimate_stroke",
    "evaluate_protocol", "extract_all", "extract_lobes", "find_velocity_minima",
    "fit_lobe", "fit_mu_sigma", "locate_salient_points", "path_midpoint",
    "refine", "resample", "signature_features", "smooth", "snr_t", "snr_v",
    "speed_profile", "synthesize_trajectory", "synthesize_velocity",
    "target_points", "time_grid",
]
