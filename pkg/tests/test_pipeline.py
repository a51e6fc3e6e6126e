"""End-to-end decomposition pipeline."""

import dataclasses

import numpy as np
import pytest

from idelog.kinematics import KinematicConfig
from idelog.model import LognormalStroke, SigmaLognormalModel
from idelog.pipeline import (
    PipelineConfig,
    PipelineError,
    config_digest,
    config_from_dict,
    decompose,
)
from idelog.refine import RefineConfig
from idelog.signals import SmoothConfig
from idelog.synthetic import signature_from_model


def _single_stroke_signature():
    model = SigmaLognormalModel(
        origin=(300.0, 400.0),
        duration=1.2,
        strokes=(
            LognormalStroke(D=60.0, t0=0.05, mu=-1.1, sigma=0.2, theta_s=0.2, theta_e=1.1),
        ),
    )
    return signature_from_model(model, 100.0, source_id="one")


def _scribble_signature():
    rng = np.random.default_rng(7)
    strokes = []
    t0 = 0.05
    theta = 0.3
    for _ in range(8):
        sweep = float(rng.uniform(-1.2, 1.2))
        strokes.append(
            LognormalStroke(
                D=float(rng.uniform(40, 80)), t0=t0, mu=-1.55, sigma=0.15,
                theta_s=theta, theta_e=theta + sweep,
            )
        )
        theta += sweep + float(rng.uniform(-0.3, 0.3))
        t0 += float(rng.uniform(0.33, 0.4))
    model = SigmaLognormalModel(
        origin=(500.0, 500.0), duration=t0 + 0.6, strokes=tuple(strokes)
    )
    return signature_from_model(model, 100.0, source_id="eight")


def test_single_stroke_with_default_config():
    result = decompose(_single_stroke_signature(), PipelineConfig())
    assert result.model.nb_log == 1
    assert result.report.snr_t > 30.0
    assert result.report.snr_v > 25.0


def test_single_stroke_with_short_onset_delay():
    cfg = PipelineConfig(kinematic=KinematicConfig(delay=0.1))
    result = decompose(_single_stroke_signature(), cfg)
    assert result.model.nb_log == 1
    assert result.report.snr_t > 30.0
    assert result.report.snr_v > 30.0


def test_eight_stroke_scribble_recovers_count_and_improves():
    result = decompose(_scribble_signature(), PipelineConfig())
    assert result.model.nb_log == 8
    assert result.report.snr_t > result.initial_report.snr_t
    assert result.trace is not None
    assert result.model.nb_log == len(result.salient.times) - 1


def test_decompose_is_deterministic():
    raw = _scribble_signature()
    a = decompose(raw, PipelineConfig())
    b = decompose(raw, PipelineConfig())
    assert a.model == b.model
    assert a.report == b.report
    np.testing.assert_array_equal(
        a.movement.trajectory.points, b.movement.trajectory.points
    )


def test_xzero_backend_has_no_plan_but_a_report():
    result = decompose(_scribble_signature(), PipelineConfig(extractor="xzero"))
    assert result.plan is None
    assert result.trace is None
    assert result.initial_report is None
    assert result.salient is None
    assert result.model.nb_log > 0
    assert result.report.snr_v > 15.0
    assert result.model.meta["provenance"]["extractor"] == "xzero"


def test_provenance_records_source_and_digest():
    cfg = PipelineConfig()
    result = decompose(_single_stroke_signature(), cfg)
    prov = result.model.meta["provenance"]
    assert prov["source"] == "one"
    assert prov["extractor"] == "idelog"
    assert prov["config"] == result.config_digest == config_digest(cfg)


def test_pipeline_error_names_the_failing_stage():
    cfg = PipelineConfig(target_rate=10.0, smoothing=SmoothConfig(cutoff_hz=14.0))
    with pytest.raises(PipelineError) as err:
        decompose(_single_stroke_signature(), cfg)
    assert err.value.stage == "smooth"
    assert "smooth" in str(err.value)


def test_unknown_extractor_is_rejected():
    with pytest.raises(ValueError):
        PipelineConfig(extractor="fourier")


def test_config_digest_tracks_content():
    assert config_digest(PipelineConfig()) == config_digest(PipelineConfig())
    changed = PipelineConfig(refinement=RefineConfig(eta=0.5))
    assert config_digest(changed) != config_digest(PipelineConfig())


def test_config_from_dict_round_trip():
    cfg = PipelineConfig(
        target_rate=150.0,
        smoothing=SmoothConfig(cutoff_hz=12.0),
        refinement=RefineConfig(eta=0.8, passes=3),
    )
    back = config_from_dict(dataclasses.asdict(cfg))
    assert back == cfg
    assert config_digest(back) == config_digest(cfg)


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config key"):
        config_from_dict({"sample_rate": 100.0})
    with pytest.raises(ValueError, match="unknown keys in 'refinement'"):
        config_from_dict({"refinement": {"eta": 0.5, "momentum": 0.9}})
