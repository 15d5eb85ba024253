"""Figure rendering for the report paths.

Figures are written next to the CSVs they illustrate; the CSVs stay the
canonical, byte-reproducible output.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .learning import Trajectory  # noqa: E402


def welfare_figure(
    trajectories: Sequence[Trajectory],
    path: Union[str, Path],
    optimum: Optional[float] = None,
    disagreement: Optional[float] = None,
) -> None:
    """Overlay per-run welfare curves with optimum/disagreement reference lines."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for traj in trajectories:
        xs = [r.index for r in traj.records]
        ys = [r.welfare for r in traj.records]
        ax.plot(xs, ys, alpha=0.6, linewidth=1.0, label=f"seed {traj.seed}")
    if optimum is not None:
        ax.axhline(optimum, color="tab:green", linestyle="--", linewidth=1.2,
                   label="social optimum")
    if disagreement is not None:
        ax.axhline(disagreement, color="tab:red", linestyle=":", linewidth=1.2,
                   label="disagreement")
    ax.set_xlabel("episode")
    ax.set_ylabel("welfare")
    if len(trajectories) <= 8:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def pareto_figure(
    payoffs: Sequence[Sequence[float]],
    front_payoffs: Sequence[Sequence[float]],
    path: Union[str, Path],
) -> None:
    """Payoff-space scatter with the Pareto frontier highlighted (2 players)."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    ax.scatter([p[0] for p in payoffs], [p[1] for p in payoffs],
               s=6, color="lightgray", label="grid profiles")
    ax.scatter([p[0] for p in front_payoffs], [p[1] for p in front_payoffs],
               s=14, color="tab:blue", label="Pareto front")
    ax.set_xlabel("payoff, player 0")
    ax.set_ylabel("payoff, player 1")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
