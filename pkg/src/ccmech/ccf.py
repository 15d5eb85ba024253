"""Conditional commitment functions and profile aggregation.

A commitment function maps an aggregate of the action profile to the minimal
action its submitter binds themselves to. Two forms are supported:

* :class:`StepCCF` - an ordered list of (offer, threshold) points. The
  committed action at aggregate g is the join of all offers whose thresholds
  are satisfied (theta <= g componentwise, inclusive). Join semantics make
  every point set a valid weakly increasing function with no ordering
  constraints between points, so list position is free to act as a priority
  for the prioritized/Borda mechanism variants.
* :class:`MatchingCCF` - commit min(rate * g[dim], cap) on a single
  dimension ("match every 2 units of the aggregate with 1 unit, up to 10"),
  bottom elsewhere.

Aggregates are weighted averages (optionally unnormalized, i.e. weighted
sums) or componentwise minima, over all players or all others.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .actions import EPS_CMP, Action, ActionSpace, Profile, join

#: Default cap on the number of points per step function; a handful of
#: steps is enough for good performance in practice.
DEFAULT_K_MAX = 4

AGGREGATOR_MODES = ("weightedAverage", "min")


@dataclass(frozen=True)
class OfferPoint:
    """An offered action and the aggregate threshold that triggers it."""

    offer: Action
    threshold: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "threshold", tuple(float(t) for t in self.threshold))


@dataclass(frozen=True)
class StepCCF:
    """k-step commitment function; position 0 is the highest priority."""

    points: tuple[OfferPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("a step CCF needs at least one point")

    @property
    def k(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MatchingCCF:
    """Linear capped matching on one dimension, bottom on all others."""

    dim: int
    rate: float
    cap: float

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError(f"dim index must be >= 0, got {self.dim}")
        for name, v in (("rate", self.rate), ("cap", self.cap)):
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


CCF = Union[StepCCF, MatchingCCF]


@dataclass(frozen=True)
class Aggregator:
    """How an action profile is collapsed into the conditioning aggregate.

    weights must be a simplex when `normalized`; with ``normalized=False``
    they are used as-is (all-ones gives a plain sum, which is how scenarios
    conditioned on absolute totals are expressed). ``include_self=True``
    realizes conditioning on global aggregates; with False the aggregate is
    taken over the other players, renormalizing weights when applicable.
    """

    mode: str = "weightedAverage"
    weights: Optional[tuple[float, ...]] = None
    include_self: bool = True
    normalized: bool = True

    def __post_init__(self):
        if self.mode not in AGGREGATOR_MODES:
            raise ValueError(f"mode must be one of {AGGREGATOR_MODES}, got {self.mode!r}")
        if self.weights is not None:
            weights = tuple(float(w) for w in self.weights)
            object.__setattr__(self, "weights", weights)
            if any(not math.isfinite(w) or w < 0 for w in weights):
                raise ValueError(f"weights must be finite and nonnegative: {weights}")
            if self.mode == "weightedAverage" and self.normalized:
                total = math.fsum(weights)
                if abs(total - 1.0) > 1e-6:
                    raise ValueError(f"normalized weights must sum to 1, got {total}")

    def resolved_weights(self, n_players: int) -> tuple[float, ...]:
        if self.weights is not None:
            if len(self.weights) != n_players:
                raise ValueError(
                    f"{len(self.weights)} weights for {n_players} players"
                )
            return self.weights
        if self.normalized:
            return tuple(1.0 / n_players for _ in range(n_players))
        return tuple(1.0 for _ in range(n_players))


def aggregate(profile: Profile, player: int, agg: Aggregator) -> tuple[float, ...]:
    """Per-dimension aggregate of `profile` as seen by `player`."""
    n = profile.n_players
    included = list(range(n)) if agg.include_self else [j for j in range(n) if j != player]
    if not included:
        raise ValueError("empty player set after excluding self")
    n_dims = len(profile.actions[0])
    if agg.mode == "min":
        return tuple(
            min(profile.actions[j][d] for j in included) for d in range(n_dims)
        )
    weights = agg.resolved_weights(n)
    total_weight = math.fsum(weights[j] for j in included)
    if agg.normalized and total_weight <= 0:
        raise ValueError("included weights sum to zero, cannot renormalize")
    out = []
    for d in range(n_dims):
        s = math.fsum(weights[j] * profile.actions[j][d] for j in included)
        out.append(s / total_weight if agg.normalized else s)
    return tuple(out)


def thresholds_met(threshold: Sequence[float], g: Sequence[float],
                   eps: float = EPS_CMP) -> bool:
    """Inclusive componentwise test theta <= g."""
    if len(threshold) != len(g):
        raise ValueError(f"threshold has {len(threshold)} dims, aggregate {len(g)}")
    return all(t <= v + eps for t, v in zip(threshold, g))


def evaluate_ccf(ccf: CCF, g: Sequence[float],
                 bounds: Sequence[tuple[float, float]]) -> Action:
    """Committed action at aggregate `g`, weakly increasing in g.

    `bounds` are the submitting player's (lower, upper) per dimension; the
    step form returns the join of all satisfied offers (bottom when none is
    satisfied), the matching form clips its matched level into bounds.
    """
    bottom = Action(tuple(lo for lo, _ in bounds))
    if isinstance(ccf, StepCCF):
        result = bottom
        for point in ccf.points:
            if thresholds_met(point.threshold, g):
                result = join(result, point.offer)
        return result
    lo, hi = bounds[ccf.dim]
    level = min(ccf.rate * g[ccf.dim], ccf.cap)
    level = min(max(level, lo), hi)
    components = list(bottom.components)
    components[ccf.dim] = level
    return Action(tuple(components))


def validate_ccf(ccf: CCF, space: ActionSpace, player: Optional[int] = None,
                 k_max: int = DEFAULT_K_MAX) -> list[str]:
    """Bounds/arity/finiteness diagnostics; empty list means valid.

    Monotonicity is automatic under join semantics, so it is not checked.
    """
    violations = []
    if isinstance(ccf, StepCCF):
        if ccf.k > k_max:
            violations.append(f"{ccf.k} points exceeds k_max = {k_max}")
        for j, point in enumerate(ccf.points):
            for msg in space.check_action(point.offer, player):
                violations.append(f"point {j} offer: {msg}")
            if len(point.threshold) != space.n_dims:
                violations.append(
                    f"point {j} threshold: {len(point.threshold)} dims, "
                    f"space has {space.n_dims}"
                )
            elif any(not math.isfinite(t) for t in point.threshold):
                violations.append(f"point {j} threshold: non-finite entry")
    elif isinstance(ccf, MatchingCCF):
        if ccf.dim >= space.n_dims:
            violations.append(
                f"matching dim {ccf.dim} out of range for {space.n_dims} dims"
            )
    else:
        violations.append(f"unknown CCF type {type(ccf).__name__}")
    return violations
