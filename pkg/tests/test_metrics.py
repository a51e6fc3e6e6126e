"""SNR metrics and the reconstruction report."""

import math

import numpy as np
import pytest

from idelog.metrics import (
    SNR_CAP_DB,
    build_report,
    snr_t,
    snr_t_flagged,
    snr_v,
    snr_v_flagged,
)
from idelog.model import (
    LognormalStroke,
    SigmaLognormalModel,
    synthesize_trajectory,
    time_grid,
)


def _cloud(seed=0, n=400):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, 2)) * [3.0, 1.5] + [10.0, -4.0]


def test_identical_inputs_hit_the_cap():
    pts = _cloud()
    value, capped = snr_t_flagged(pts, pts)
    assert value == SNR_CAP_DB == 120.0
    assert capped
    v = np.abs(np.sin(np.linspace(0.0, 3.0, 200))) + 0.1
    value_v, capped_v = snr_v_flagged(v, v)
    assert value_v == SNR_CAP_DB
    assert capped_v


def test_zero_reconstruction_gives_zero_db():
    v = np.abs(np.sin(np.linspace(0.0, 3.0, 200))) + 0.1
    assert snr_v(v, np.zeros_like(v)) == pytest.approx(0.0, abs=1e-12)


def test_ninety_percent_reconstruction_gives_twenty_db():
    v = np.abs(np.sin(np.linspace(0.0, 3.0, 200))) + 0.1
    assert snr_v(v, 0.9 * v) == pytest.approx(20.0, abs=0.01)


def test_trajectory_snr_against_centroid_is_zero_db():
    pts = _cloud(3)
    centroid = np.tile(pts.mean(axis=0), (pts.shape[0], 1))
    assert snr_t(pts, centroid) == pytest.approx(0.0, abs=1e-12)


def test_offset_by_a_tenth_of_rms_radius_gives_twenty_db():
    pts = _cloud(4)
    centered = pts - pts.mean(axis=0)
    rms = math.sqrt(float(np.sum(centered**2)) / pts.shape[0])
    direction = np.array([1.0, 0.0])
    shifted = pts + 0.1 * rms * direction
    assert snr_t(pts, shifted) == pytest.approx(20.0, abs=1e-9)


def test_trajectory_snr_is_translation_invariant():
    pts = _cloud(5)
    rec = pts + np.array([0.02, -0.05]) * np.linspace(0, 1, pts.shape[0])[:, None]
    base = snr_t(pts, rec)
    moved = snr_t(pts + [100.0, -40.0], rec + [100.0, -40.0])
    assert moved == pytest.approx(base, abs=1e-9)


def test_speed_snr_is_scale_invariant():
    v = np.abs(np.sin(np.linspace(0.0, 3.0, 200))) + 0.1
    rec = v + 0.01 * np.cos(np.linspace(0.0, 7.0, 200))
    assert snr_v(17.0 * v, 17.0 * rec) == pytest.approx(snr_v(v, rec), abs=1e-9)


def test_noise_ladder_is_monotone():
    rng = np.random.default_rng(11)
    v = np.abs(np.sin(np.linspace(0.0, 3.0, 500))) + 0.1
    noise = rng.standard_normal(v.size)
    values = [snr_v(v, v + eps * noise) for eps in (0.001, 0.01, 0.1, 0.5)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_zero_energy_observed_is_rejected():
    zeros = np.zeros(50)
    with pytest.raises(ValueError):
        snr_v(zeros, zeros + 1.0)
    flat = np.tile([2.0, 3.0], (50, 1))
    with pytest.raises(ValueError):
        snr_t(flat, flat + 0.1)


def test_shape_mismatch_is_rejected():
    with pytest.raises(ValueError):
        snr_v(np.ones(10), np.ones(11))
    with pytest.raises(ValueError):
        snr_t(np.ones((10, 2)), np.ones((9, 2)))


def _movement(model):
    return synthesize_trajectory(model, time_grid(model.duration, 200.0))


def test_report_divides_by_stroke_count():
    model = SigmaLognormalModel(
        origin=(0.0, 0.0),
        duration=1.4,
        strokes=(
            LognormalStroke(D=20.0, t0=0.05, mu=-1.2, sigma=0.2, theta_s=0.1, theta_e=0.9),
            LognormalStroke(D=15.0, t0=0.55, mu=-1.4, sigma=0.22, theta_s=1.0, theta_e=0.3),
        ),
    )
    movement = _movement(model)
    report = build_report(
        model, movement.trajectory, movement.speed, movement,
        compared_against_preprocessed=True,
    )
    assert report.nb_log == 2
    assert report.snr_t == SNR_CAP_DB
    assert report.snr_t_per_log == pytest.approx(report.snr_t / 2)
    assert report.snr_v_per_log == pytest.approx(report.snr_v / 2)
    assert report.compared_against_preprocessed


def test_report_with_no_strokes_has_no_per_log_ratio():
    model = SigmaLognormalModel(
        origin=(0.0, 0.0),
        duration=1.0,
        strokes=(
            LognormalStroke(D=10.0, t0=0.05, mu=-1.0, sigma=0.25, theta_s=0.0, theta_e=0.0),
        ),
    )
    movement = _movement(model)
    empty = SigmaLognormalModel(origin=(0.0, 0.0), duration=1.0, strokes=())
    empty_movement = synthesize_trajectory(empty, time_grid(1.0, 200.0))
    report = build_report(
        empty, movement.trajectory, movement.speed, empty_movement,
        compared_against_preprocessed=False,
    )
    assert report.nb_log == 0
    assert report.snr_t_per_log is None
    assert report.snr_v_per_log is None
    assert not report.compared_against_preprocessed
