"""Reconstruction quality metrics.

Signal-to-noise ratios of the reconstructed trajectory and speed against
the observed ones, plus the per-stroke efficiency ratios.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model import ReconstructedMovement, SigmaLognormalModel
from .signals import SpeedProfile, Trajectory

logger = logging.getLogger(__name__)

SNR_CAP_DB = 120.0


@dataclass(frozen=True)
class ReconstructionReport:
    snr_t: float
    snr_v: float
    nb_log: int
    snr_t_per_log: float | None
    snr_v_per_log: float | None
    compared_against_preprocessed: bool
    snr_t_capped: bool = False
    snr_v_capped: bool = False


def _ratio_db(signal_energy: float, noise_energy: float) -> tuple[float, bool]:
    if signal_energy <= 0.0:
        raise ValueError("observed signal has zero energy")
    if noise_energy <= 0.0 or 10.0 * np.log10(signal_energy / noise_energy) > SNR_CAP_DB:
        logger.debug("snr capped at %.0f dB", SNR_CAP_DB)
        return SNR_CAP_DB, True
    return float(10.0 * np.log10(signal_energy / noise_energy)), False


def snr_t_flagged(obs: np.ndarray, rec: np.ndarray) -> tuple[float, bool]:
    """Trajectory SNR in dB; both inputs are (n, 2) point arrays on the
    same grid. The signal energy is centered on the observed means."""
    obs = np.asarray(obs, dtype=float)
    rec = np.asarray(rec, dtype=float)
    if obs.shape != rec.shape:
        raise ValueError("trajectories must share a grid")
    centered = obs - obs.mean(axis=0)
    signal = float(np.sum(centered * centered))
    noise = float(np.sum((obs - rec) ** 2))
    return _ratio_db(signal, noise)


def snr_v_flagged(obs: np.ndarray, rec: np.ndarray) -> tuple[float, bool]:
    """Speed SNR in dB for two scalar profiles on the same grid."""
    obs = np.asarray(obs, dtype=float)
    rec = np.asarray(rec, dtype=float)
    if obs.shape != rec.shape:
        raise ValueError("profiles must share a grid")
    signal = float(np.sum(obs * obs))
    noise = float(np.sum((obs - rec) ** 2))
    return _ratio_db(signal, noise)


def snr_t(obs: np.ndarray, rec: np.ndarray) -> float:
    return snr_t_flagged(obs, rec)[0]


def snr_v(obs: np.ndarray, rec: np.ndarray) -> float:
    return snr_v_flagged(obs, rec)[0]


def build_report(
    model: SigmaLognormalModel,
    observed_traj: Trajectory,
    observed_speed: SpeedProfile,
    movement: ReconstructedMovement,
    compared_against_preprocessed: bool,
) -> ReconstructionReport:
    """Assemble the quality report for one decomposition."""
    st, st_cap = snr_t_flagged(observed_traj.points, movement.trajectory.points)
    sv, sv_cap = snr_v_flagged(observed_speed.values, movement.speed.values)
    n = model.nb_log
    return ReconstructionReport(
        snr_t=st,
        snr_v=sv,
        nb_log=n,
        snr_t_per_log=st / n if n > 0 else None,
        snr_v_per_log=sv / n if n > 0 else None,
        compared_against_preprocessed=compared_against_preprocessed,
        snr_t_capped=st_cap,
        snr_v_capped=sv_cap,
    )
