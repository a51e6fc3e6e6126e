"""Synthetic movement generation.

Seeded random sigma-lognormal models and the captured-signature form of
their trajectories, for benchmarks and the verification protocol.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    LognormalStroke,
    SigmaLognormalModel,
    synthesize_trajectory,
    time_grid,
)
from .signals import RawSignature


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    count: int = 10
    strokes_min: int = 4
    strokes_max: int = 12
    duration_min: float = 1.0
    duration_max: float = 5.0
    rate: float = 100.0
    scale: float = 1.0


def sample_model(rng: np.random.Generator, cfg: GeneratorConfig) -> SigmaLognormalModel:
    """Draw one random model with human-like parameter ranges."""
    n = int(rng.integers(cfg.strokes_min, cfg.strokes_max + 1))
    base_gap = rng.uniform(0.15, 0.40)
    gaps = base_gap + rng.uniform(-0.03, 0.06, size=n - 1) if n > 1 else np.empty(0)
    onsets = np.concatenate([[0.05], 0.05 + np.cumsum(gaps)])
    sigmas = rng.uniform(0.12, 0.28, size=n)
    peak_delays = rng.uniform(0.10, 0.22, size=n)
    mus = np.log(peak_delays) + sigmas**2
    amps = rng.uniform(30.0, 90.0, size=n) * cfg.scale
    theta = rng.uniform(-np.pi, np.pi)
    strokes = []
    for j in range(n):
        sweep = rng.uniform(-1.6, 1.6)
        strokes.append(
            LognormalStroke(
                D=float(amps[j]),
                t0=float(onsets[j]),
                mu=float(mus[j]),
                sigma=float(sigmas[j]),
                theta_s=float(theta),
                theta_e=float(theta + sweep),
            )
        )
        theta = theta + sweep + rng.uniform(-0.4, 0.4)
    tail = float(onsets[-1] + np.exp(mus[-1] + 3.5 * sigmas[-1]) + 0.05)
    duration = float(np.clip(tail, cfg.duration_min, cfg.duration_max))
    if tail > cfg.duration_max and n > 1:
        # compress the onsets so the grid still covers the movement
        squeeze = (cfg.duration_max - 0.05 - float(np.exp(mus[-1] + 3.5 * sigmas[-1]))) / (
            onsets[-1] - 0.05
        )
        squeeze = max(squeeze, 0.2)
        new_onsets = 0.05 + (onsets - 0.05) * squeeze
        strokes = [
            LognormalStroke(
                D=s.D, t0=float(new_onsets[j]), mu=s.mu, sigma=s.sigma,
                theta_s=s.theta_s, theta_e=s.theta_e,
            )
            for j, s in enumerate(strokes)
        ]
        duration = cfg.duration_max
    origin = (float(rng.uniform(100.0, 900.0)), float(rng.uniform(100.0, 900.0)))
    return SigmaLognormalModel(origin=origin, duration=duration, strokes=tuple(strokes))


def signature_from_model(
    model: SigmaLognormalModel, rate: float = 100.0, source_id: str = ""
) -> RawSignature:
    """Render a model as a captured signature at the given sampling rate."""
    times = time_grid(model.duration, rate)
    movement = synthesize_trajectory(model, times)
    pts = movement.trajectory.points
    ones = np.ones(times.size)
    return RawSignature(
        t=times, x=pts[:, 0], y=pts[:, 1], p=ones,
        pen_down=ones.astype(bool), source_id=source_id,
    )


def generate_corpus(cfg: GeneratorConfig) -> list[tuple[SigmaLognormalModel, RawSignature]]:
    """Seeded corpus of (ground-truth model, rendered signature) pairs."""
    rng = np.random.default_rng(cfg.seed)
    out = []
    for i in range(cfg.count):
        model = sample_model(rng, cfg)
        out.append((model, signature_from_model(model, cfg.rate, source_id=f"syn{i:03d}")))
    return out


def _jitter_model(
    model: SigmaLognormalModel, rng: np.random.Generator, amount: float
) -> SigmaLognormalModel:
    strokes = []
    for s in model.strokes:
        strokes.append(
            LognormalStroke(
                D=float(max(s.D * (1.0 + rng.normal(0.0, 0.05 * amount)), 1e-6)),
                t0=float(s.t0 + rng.normal(0.0, 0.01 * amount)),
                mu=float(s.mu + rng.normal(0.0, 0.03 * amount)),
                sigma=float(max(s.sigma * (1.0 + rng.normal(0.0, 0.05 * amount)), 0.03)),
                theta_s=float(s.theta_s + rng.normal(0.0, 0.05 * amount)),
                theta_e=float(s.theta_e + rng.normal(0.0, 0.05 * amount)),
            )
        )
    strokes.sort(key=lambda s: s.t0)
    return SigmaLognormalModel(
        origin=model.origin, duration=model.duration, strokes=tuple(strokes)
    )


def writer_corpus(
    n_writers: int,
    per_writer: int,
    seed: int = 0,
    jitter: float = 1.0,
    cfg: GeneratorConfig | None = None,
) -> dict[str, list[RawSignature]]:
    """Corpus keyed by writer id: one base model per writer, jittered per
    sample so within-writer variation stays below between-writer
    variation."""
    cfg = cfg or GeneratorConfig()
    rng = np.random.default_rng(seed)
    corpus: dict[str, list[RawSignature]] = {}
    for w in range(n_writers):
        base = sample_model(rng, cfg)
        sigs = []
        for k in range(per_writer):
            variant = _jitter_model(base, rng, jitter)
            sigs.append(
                signature_from_model(variant, cfg.rate, source_id=f"w{w:02d}_s{k:02d}")
            )
        corpus[f"w{w:02d}"] = sigs
    return corpus
