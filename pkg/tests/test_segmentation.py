"""Velocity-minima segmentation and salient point location."""

import math

import numpy as np
import pytest

from idelog.model import (
    LognormalStroke,
    SigmaLognormalModel,
    lognormal_pdf,
    synthesize_trajectory,
    time_grid,
)
from idelog.segmentation import (
    SegmentationConfig,
    extract_lobes,
    find_velocity_minima,
    locate_salient_points,
)
from idelog.signals import SpeedProfile, eight_connected

RATE = 200.0


def _profile(values):
    return SpeedProfile(t0=0.0, dt=1.0 / RATE, values=np.asarray(values, dtype=float))


def _bumps(duration, *strokes):
    t = time_grid(duration, RATE)
    v = np.zeros_like(t)
    for D, t0, mu, sigma in strokes:
        v += D * lognormal_pdf(t, t0, mu, sigma)
    return t, _profile(v)


def test_single_bump_yields_endpoints_only():
    _, prof = _bumps(1.2, (10.0, 0.05, -1.0, 0.25))
    minima = find_velocity_minima(prof, SegmentationConfig())
    assert minima.size == 2
    assert minima[0] == 0.0
    assert math.isclose(minima[-1], prof.t0 + (prof.values.size - 1) * prof.dt)


def test_two_separated_bumps_yield_one_interior_minimum():
    _, prof = _bumps(1.6, (10.0, 0.05, -1.2, 0.2), (8.0, 0.75, -1.2, 0.2))
    minima = find_velocity_minima(prof, SegmentationConfig())
    assert minima.size == 3


def test_prominence_filter_suppresses_ripple():
    t, base_prof = _bumps(1.5, (1.0, 0.1, -0.7, 0.3))
    base = base_prof.values
    ripple = 0.01 * base.max() * np.sin(2 * np.pi * 25 * t) * (base > 0.02 * base.max())
    prof = _profile(np.clip(base + ripple, 0.0, None))
    raw = find_velocity_minima(prof, SegmentationConfig(filter_enabled=False))
    filtered = find_velocity_minima(
        prof, SegmentationConfig(filter_enabled=True, min_prominence=0.02)
    )
    assert raw.size > 3
    assert filtered.size == 2


def test_interior_boundaries_are_local_minima():
    _, prof = _bumps(2.2, (10.0, 0.05, -1.4, 0.18), (9.0, 0.6, -1.4, 0.18), (8.0, 1.2, -1.4, 0.18))
    minima = find_velocity_minima(prof, SegmentationConfig())
    idx = np.rint((minima[1:-1] - prof.t0) / prof.dt).astype(int)
    for i in idx:
        assert prof.values[i] <= prof.values[i - 1]
        assert prof.values[i] <= prof.values[i + 1]


def test_raising_prominence_never_adds_boundaries():
    t, prof = _bumps(2.0, (10.0, 0.05, -1.3, 0.2), (2.0, 0.7, -1.3, 0.2), (9.0, 1.2, -1.3, 0.2))
    counts = []
    for prominence in (0.005, 0.05, 0.3):
        cfg = SegmentationConfig(filter_enabled=True, min_prominence=prominence)
        counts.append(find_velocity_minima(prof, cfg).size)
    assert counts == sorted(counts, reverse=True)


def test_well_separated_bumps_count_exactly():
    strokes = [(10.0 - j, 0.05 + 0.5 * j, -1.5, 0.15) for j in range(4)]
    _, prof = _bumps(2.6, *strokes)
    minima = find_velocity_minima(prof, SegmentationConfig(filter_enabled=True))
    assert minima.size == 5


def test_short_profile_returns_endpoints():
    prof = _profile([1.0, 2.0])
    minima = find_velocity_minima(prof, SegmentationConfig())
    assert minima.size == 2


def test_lobes_partition_the_profile():
    _, prof = _bumps(1.6, (10.0, 0.05, -1.2, 0.2), (8.0, 0.75, -1.2, 0.2))
    minima = find_velocity_minima(prof, SegmentationConfig())
    lobes = extract_lobes(prof, minima)
    assert len(lobes) == 2
    stacked = np.sum([lobe.samples for lobe in lobes], axis=0)
    np.testing.assert_allclose(stacked, prof.values, atol=1e-12)
    for lobe in lobes:
        assert lobe.samples.shape == prof.values.shape


def test_lobe_peaks_match_bump_peaks():
    _, prof = _bumps(1.6, (10.0, 0.05, -1.2, 0.2), (8.0, 0.75, -1.2, 0.2))
    minima = find_velocity_minima(prof, SegmentationConfig())
    lobes = extract_lobes(prof, minima)
    peaks = sorted(float(np.max(lobe.samples)) for lobe in lobes)
    assert math.isclose(peaks[-1], float(prof.values.max()), rel_tol=1e-12)
    assert peaks[0] > 0.5 * peaks[-1]


def test_extract_lobes_needs_two_boundaries():
    _, prof = _bumps(1.0, (10.0, 0.05, -1.2, 0.2))
    with pytest.raises(ValueError):
        extract_lobes(prof, np.array([0.5]))


def test_salient_points_pin_endpoints_and_locate_interiors():
    strokes = (
        LognormalStroke(D=40.0, t0=0.05, mu=-1.5, sigma=0.16, theta_s=0.0, theta_e=0.8),
        LognormalStroke(D=35.0, t0=0.55, mu=-1.5, sigma=0.16, theta_s=1.0, theta_e=0.2),
        LognormalStroke(D=30.0, t0=1.05, mu=-1.5, sigma=0.16, theta_s=0.3, theta_e=-0.6),
    )
    model = SigmaLognormalModel(origin=(0.0, 0.0), duration=1.8, strokes=strokes)
    grid = time_grid(1.8, RATE)
    movement = synthesize_trajectory(model, grid)
    path = eight_connected(movement.trajectory, 1.0)
    minima = find_velocity_minima(movement.speed, SegmentationConfig())
    salient = locate_salient_points(minima, movement.trajectory, path)

    assert salient.points.shape == (minima.size, 2)
    assert minima.size == 4
    np.testing.assert_array_equal(salient.points[0], path.cells[0].astype(float))
    np.testing.assert_array_equal(salient.points[-1], path.cells[-1].astype(float))
    for k, t_min in enumerate(minima[1:-1], start=1):
        i = int(np.argmin(np.abs(grid - t_min)))
        err = np.hypot(*(salient.points[k] - movement.trajectory.points[i]))
        assert err <= 2.0 * math.sqrt(2.0)


def test_salient_times_echo_the_minima():
    _, prof = _bumps(1.6, (10.0, 0.05, -1.2, 0.2), (8.0, 0.75, -1.2, 0.2))
    theta = np.linspace(0.0, 1.0, prof.values.size)
    from idelog.signals import Trajectory

    traj = Trajectory(
        t0=0.0, dt=prof.dt, points=np.column_stack([50 * theta, np.zeros_like(theta)])
    )
    path = eight_connected(traj, 1.0)
    minima = find_velocity_minima(prof, SegmentationConfig())
    salient = locate_salient_points(minima, traj, path)
    np.testing.assert_array_equal(salient.times, minima)
