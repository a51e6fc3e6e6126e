"""Figure rendering for the report outputs.

Every figure goes straight to a file with the Agg backend and fixed
metadata so repeated runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .pipeline import DecompositionResult  # noqa: E402
from .verification import DETCurve  # noqa: E402

_SAVE_KW = {"dpi": 110, "metadata": {"Software": "idelog"}}


def render_decomposition(result: DecompositionResult, path: str | Path) -> None:
    """Two panels: ink overlay and speed overlay."""
    fig, (ax_xy, ax_v) = plt.subplots(1, 2, figsize=(10.0, 4.0))
    obs = result.trajectory.points
    rec = result.movement.trajectory.points
    ax_xy.plot(obs[:, 0], obs[:, 1], color="0.3", lw=1.2, label="observed")
    ax_xy.plot(rec[:, 0], rec[:, 1], color="tab:red", lw=1.0, label="model")
    if result.salient is not None:
        sp = result.salient.points
        ax_xy.plot(sp[:, 0], sp[:, 1], "o", ms=4, color="tab:blue", label="salient")
    if result.plan is not None:
        tp = result.plan.target_points
        ax_xy.plot(tp[:, 0], tp[:, 1], "x", ms=5, color="tab:green", label="targets")
    ax_xy.set_aspect("equal", adjustable="datalim")
    ax_xy.set_title(f"trajectory, SNR_t={result.report.snr_t:.2f} dB")
    ax_xy.legend(fontsize=8)
    t = result.speed.times
    ax_v.plot(t, result.speed.values, color="0.3", lw=1.2, label="observed")
    ax_v.plot(t, result.movement.speed.values, color="tab:red", lw=1.0, label="model")
    ax_v.set_xlabel("t [s]")
    ax_v.set_title(f"speed, SNR_v={result.report.snr_v:.2f} dB, {result.model.nb_log} strokes")
    ax_v.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_det(curves: dict[str, DETCurve], path: str | Path) -> None:
    """Overlay DET curves on one set of axes."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    for label in sorted(curves):
        c = curves[label]
        ax.plot(c.far, c.frr, lw=1.2, label=label)
    ax.plot([0, 1], [0, 1], color="0.8", lw=0.8, ls="--")
    ax.set_xlabel("false acceptance rate")
    ax.set_ylabel("false rejection rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_comparison(
    labels: list[str], snr_t_pairs: list[tuple[float, float]], path: str | Path
) -> None:
    """Per-file trajectory SNR of the two extractors side by side."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = range(len(labels))
    ax.plot(xs, [p[0] for p in snr_t_pairs], "o", label="idelog")
    ax.plot(xs, [p[1] for p in snr_t_pairs], "s", label="xzero")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=60, fontsize=7, ha="right")
    ax.set_ylabel("SNR_t [dB]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
