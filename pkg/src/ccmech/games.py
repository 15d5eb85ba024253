"""Base games the mechanism wraps.

The concrete instance is a one-shot public goods game with N symmetric
regions: capital and production are constant (normalized to 1), the only
control is the regional mitigation rate mu_i in [0, 1], mitigation costs are
quadratic (gamma * mu_i^2) and climate damages are linear in global
emissions (2 * beta * (N - sum_j mu_j)), giving period payoffs

    Pi_i = 1 - gamma * mu_i^2 - 2*beta*N + 2*beta * sum_j mu_j.

The game has closed forms: every player mitigates beta/gamma in the Nash
equilibrium and N*beta/gamma at the social optimum. Because marginal cost
depends only on the own rate, play under liabilities is a dominant-strategy
continuation: each player mitigates max(liability, beta/gamma).

Analysis and learning are game-agnostic against the small BaseGame protocol
(scalar action per player); only this game ships as a concrete instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from .errors import ClippedRegimeError

#: Slack for validating rates that should lie in [0, 1].
_RATE_EPS = 1e-9


@dataclass(frozen=True)
class PublicGoodsParams:
    """(N, beta, gamma): region count, damage and cost coefficients."""

    n: int
    beta: float
    gamma: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be finite and > 0, got {self.gamma}")


def _check_rates(p: PublicGoodsParams, mu: Sequence[float]) -> None:
    if len(mu) != p.n:
        raise ValueError(f"{len(mu)} rates for {p.n} players")
    for i, m in enumerate(mu):
        if not (-_RATE_EPS <= m <= 1.0 + _RATE_EPS):
            raise ValueError(f"mu[{i}] = {m} outside [0, 1]")


def pg_payoffs(p: PublicGoodsParams, mu: Sequence[float]) -> tuple[float, ...]:
    """Per-region period payoffs at mitigation profile `mu`."""
    _check_rates(p, mu)
    total = math.fsum(mu)
    base = 1.0 - 2.0 * p.beta * p.n + 2.0 * p.beta * total
    return tuple(base - p.gamma * m * m for m in mu)


def pg_nash(p: PublicGoodsParams) -> float:
    """Symmetric Nash mitigation rate beta/gamma, clipped to [0, 1]."""
    return min(max(p.beta / p.gamma, 0.0), 1.0)


def pg_social_optimum(p: PublicGoodsParams) -> float:
    """Symmetric welfare-optimal rate N*beta/gamma, clipped to [0, 1]."""
    return min(max(p.n * p.beta / p.gamma, 0.0), 1.0)


def pg_closed_form_payoffs(p: PublicGoodsParams) -> tuple[float, float]:
    """(Nash, optimum) per-region payoffs in the interior regime.

    Valid only when neither analytic rate clips; agrees with pg_payoffs at
    the symmetric profiles to ~1e-12.
    """
    if p.beta / p.gamma > 1.0 or p.n * p.beta / p.gamma > 1.0:
        raise ClippedRegimeError(
            f"closed forms need beta/gamma <= 1 and N*beta/gamma <= 1 "
            f"(got {p.beta / p.gamma:.4g}, {p.n * p.beta / p.gamma:.4g})"
        )
    common = 1.0 - 2.0 * p.beta * p.n
    ratio = p.beta * p.beta / p.gamma
    nash = common + (2.0 * p.n - 1.0) * ratio
    optimum = common + p.n * p.n * ratio
    return nash, optimum


def constrained_play(p: PublicGoodsParams, liabilities: Sequence[float]) -> tuple[float, ...]:
    """Dominant-strategy play above the liability floor.

    Each payoff is concave in the own rate with unconstrained maximum at
    beta/gamma, so the constrained best response is max(liability, Nash).
    """
    _check_rates(p, liabilities)
    floor = pg_nash(p)
    return tuple(max(x, floor) for x in liabilities)


@runtime_checkable
class BaseGame(Protocol):
    """Scalar-action game interface used by analysis and learning."""

    @property
    def n_players(self) -> int: ...

    def action_bounds(self) -> tuple[tuple[float, float], ...]: ...

    def payoffs(self, actions: Sequence[float]) -> tuple[float, ...]: ...

    def constrained_play(self, liabilities: Sequence[float]) -> tuple[float, ...]: ...

    def disagreement_actions(self) -> tuple[float, ...]: ...


class PublicGoodsGame:
    """BaseGame wrapper around the public goods closed forms."""

    def __init__(self, params: PublicGoodsParams):
        self.params = params

    @property
    def n_players(self) -> int:
        return self.params.n

    def action_bounds(self) -> tuple[tuple[float, float], ...]:
        return tuple((0.0, 1.0) for _ in range(self.params.n))

    def payoffs(self, actions: Sequence[float]) -> tuple[float, ...]:
        return pg_payoffs(self.params, actions)

    def constrained_play(self, liabilities: Sequence[float]) -> tuple[float, ...]:
        return constrained_play(self.params, liabilities)

    def disagreement_actions(self) -> tuple[float, ...]:
        return tuple(pg_nash(self.params) for _ in range(self.params.n))

    def social_optimum_actions(self) -> tuple[float, ...]:
        return tuple(pg_social_optimum(self.params) for _ in range(self.params.n))


#: The two-player parameterization used throughout the worked examples.
REFERENCE_PARAMS = PublicGoodsParams(n=2, beta=0.09, gamma=0.3)

#: Three-player variant of the same game.
THREE_PLAYER_PARAMS = PublicGoodsParams(n=3, beta=0.09, gamma=0.3)


def reference_game() -> PublicGoodsGame:
    return PublicGoodsGame(REFERENCE_PARAMS)
