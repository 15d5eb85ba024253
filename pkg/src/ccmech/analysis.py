"""Brute-force game-theoretic oracles at desk scale.

Everything here is exhaustive enumeration over explicit grids: Pareto
frontiers, individual rationality, core membership with coalition blocking,
and Nash/strong-Nash enumeration of the commitment game built by wrapping a
base game with the mechanism. These are the independent checks the solver
and the learning dynamics are verified against, so none of them go through
solve_largest_feasible's fixed-point shortcut when a direct definition is
available.

All reports use a canonical (enumeration) order and are deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import guard
from .actions import EPS_CMP, Action, ActionSpace, VariableSpec
from .ccf import DEFAULT_K_MAX, Aggregator, OfferPoint, StepCCF
from .games import BaseGame
from .mechanism import DEFAULT_EPS_FIX, DEFAULT_MAX_ITER, Scenario, Submission, solve

#: Payoff comparisons use a tighter tolerance than action comparisons:
#: payoffs at identical liability profiles are bitwise equal, so ties are
#: exact and anything beyond roundoff is a real improvement.
PAYOFF_EPS = 1e-12


@dataclass(frozen=True)
class StrategyGrid:
    """Discretized k-point CCF strategy space for exhaustive checks."""

    action_levels: tuple[float, ...]
    threshold_levels: tuple[float, ...]
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "action_levels", tuple(float(x) for x in self.action_levels))
        object.__setattr__(self, "threshold_levels", tuple(float(x) for x in self.threshold_levels))
        for name, levels in (("action", self.action_levels), ("threshold", self.threshold_levels)):
            if not levels:
                raise ValueError(f"{name} levels must be nonempty")
            if list(levels) != sorted(set(levels)):
                raise ValueError(f"{name} levels must be sorted and unique: {levels}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    def points(self, non_exploitable_only: bool = False) -> list[tuple[float, float]]:
        """All (offer, threshold) pairs; the restriction keeps theta >= a."""
        return [
            (a, t)
            for a in self.action_levels
            for t in self.threshold_levels
            if not non_exploitable_only or t >= a - EPS_CMP
        ]

    def strategies(self, non_exploitable_only: bool = False) -> list[StepCCF]:
        """All ordered k-tuples of grid points, encoded as step CCFs."""
        pairs = self.points(non_exploitable_only)
        guard.check_enumeration(len(pairs) ** self.k)
        out = []
        for combo in itertools.product(pairs, repeat=self.k):
            out.append(
                StepCCF(
                    tuple(
                        OfferPoint(offer=Action((a,)), threshold=(t,)) for a, t in combo
                    )
                )
            )
        return out


@dataclass(frozen=True)
class MechanismTemplate:
    """Everything a commitment-game scenario needs besides the submissions."""

    agg: Aggregator = Aggregator()
    variant: str = "basic"
    eps_fix: float = DEFAULT_EPS_FIX
    max_iter: int = DEFAULT_MAX_ITER


def scalar_space(game: BaseGame) -> ActionSpace:
    """One-dimensional action space covering every player's bounds."""
    bounds = game.action_bounds()
    lo = min(b[0] for b in bounds)
    hi = max(b[1] for b in bounds)
    per_player = None
    if any(b != (lo, hi) for b in bounds):
        per_player = tuple(((b[0], b[1]),) for b in bounds)
    return ActionSpace(dims=(VariableSpec("action", lo, hi),), player_bounds=per_player)


def make_scenario(game: BaseGame, ccfs: Sequence[StepCCF],
                  template: MechanismTemplate) -> Scenario:
    k_max = max([DEFAULT_K_MAX] + [c.k for c in ccfs if isinstance(c, StepCCF)])
    return Scenario(
        players=tuple(f"p{i}" for i in range(game.n_players)),
        space=scalar_space(game),
        submissions=tuple(Submission(ccf=c) for c in ccfs),
        agg=template.agg,
        variant=template.variant,
        eps_fix=template.eps_fix,
        max_iter=template.max_iter,
        k_max=k_max,
    )


@dataclass(frozen=True)
class Outcome:
    """Mechanism liabilities and the induced play of the base game."""

    liabilities: tuple[float, ...]
    actions: tuple[float, ...]
    payoffs: tuple[float, ...]


def evaluate_outcome(game: BaseGame, ccfs: Sequence[StepCCF],
                     template: MechanismTemplate) -> Outcome:
    """Solve the mechanism for `ccfs` and play the base game under it."""
    liab = solve(make_scenario(game, ccfs, template))
    liabilities = tuple(a.components[0] for a in liab.profile.actions)
    actions = game.constrained_play(liabilities)
    return Outcome(liabilities=liabilities, actions=actions,
                   payoffs=game.payoffs(actions))


def welfare(payoffs: Sequence[float]) -> float:
    """Total payoff; the welfare measure used throughout."""
    return math.fsum(payoffs)


def _grid_levels(lo: float, hi: float, step: float) -> list[float]:
    span = hi - lo
    count = span / step
    if abs(count - round(count)) > 1e-9:
        raise ValueError(f"step {step} does not divide [{lo}, {hi}] evenly")
    n = int(round(count))
    return [lo + step * i for i in range(n)] + [hi]


def pareto_front(game: BaseGame, step: float) -> list[tuple[float, ...]]:
    """All grid profiles not strictly Pareto-dominated by another grid profile.

    Dominance: weakly better for every player and strictly better for at
    least one.
    """
    levels = [_grid_levels(lo, hi, step) for lo, hi in game.action_bounds()]
    total = 1
    for lv in levels:
        total *= len(lv)
    guard.check_enumeration(total * total)
    profiles = list(itertools.product(*levels))
    payoffs = np.array([game.payoffs(p) for p in profiles])
    front = []
    for i, profile in enumerate(profiles):
        weakly_better = (payoffs >= payoffs[i] - PAYOFF_EPS).all(axis=1)
        strictly_better = (payoffs > payoffs[i] + PAYOFF_EPS).any(axis=1)
        if not (weakly_better & strictly_better).any():
            front.append(profile)
    return front


def is_individually_rational(game: BaseGame, profile: Sequence[float],
                             eps: float = EPS_CMP) -> tuple[bool, ...]:
    """Per player: payoff at `profile` >= disagreement (base Nash) payoff."""
    payoffs = game.payoffs(profile)
    disagreement = game.payoffs(game.disagreement_actions())
    return tuple(p >= d - eps for p, d in zip(payoffs, disagreement))


def _nonempty_coalitions(n: int) -> list[tuple[int, ...]]:
    # Size-ascending, then lexicographic: singleton blocks surface first.
    out = []
    for size in range(1, n + 1):
        out.extend(itertools.combinations(range(n), size))
    return out


def core_membership(
    game: BaseGame,
    profile: Sequence[float],
    step: float,
    blocking: str = "nash",
) -> tuple[bool, Optional[tuple[tuple[int, ...], tuple[float, ...]]]]:
    """Exhaustive coalition-blocking scan on a grid.

    A coalition blocks if some joint grid deviation makes every member
    strictly better off than at `profile` while outsiders revert to the
    disagreement convention (`blocking`: "nash" for base-Nash reversion,
    "bottom" for minimal actions). Returns (True, None) for core members,
    else (False, (coalition, deviation)) where the witness deviation
    maximizes the minimum member gain.
    """
    if blocking not in ("nash", "bottom"):
        raise ValueError(f"blocking must be 'nash' or 'bottom', got {blocking!r}")
    n = game.n_players
    bounds = game.action_bounds()
    levels = [_grid_levels(lo, hi, step) for lo, hi in bounds]
    outsiders = (
        game.disagreement_actions()
        if blocking == "nash"
        else tuple(lo for lo, _ in bounds)
    )
    base_payoffs = game.payoffs(profile)
    total = sum(
        int(np.prod([len(levels[i]) for i in coalition]))
        for coalition in _nonempty_coalitions(n)
    )
    guard.check_enumeration(total)
    for coalition in _nonempty_coalitions(n):
        best_gain = 0.0
        best_deviation = None
        for deviation in itertools.product(*(levels[i] for i in coalition)):
            candidate = list(outsiders)
            for member, value in zip(coalition, deviation):
                candidate[member] = value
            payoffs = game.payoffs(candidate)
            gain = min(payoffs[m] - base_payoffs[m] for m in coalition)
            if gain > PAYOFF_EPS and gain > best_gain + PAYOFF_EPS:
                best_gain = gain
                best_deviation = deviation
        if best_deviation is not None:
            return False, (coalition, best_deviation)
    return True, None


@dataclass(frozen=True)
class OutcomeRecord:
    strategy_profile: tuple[int, ...]
    liabilities: tuple[float, ...]
    actions: tuple[float, ...]
    payoffs: tuple[float, ...]


@dataclass(frozen=True)
class EquilibriumReport:
    """Exhaustive Nash / strong-Nash listing of a gridded commitment game."""

    strategies: tuple[StepCCF, ...]
    nash: tuple[OutcomeRecord, ...]
    strong: tuple[OutcomeRecord, ...]

    def nash_profiles(self) -> list[tuple[int, ...]]:
        return [r.strategy_profile for r in self.nash]

    def strong_profiles(self) -> list[tuple[int, ...]]:
        return [r.strategy_profile for r in self.strong]


def outcome_set(records: Sequence[OutcomeRecord], decimals: int = 9) -> set:
    """The set of induced outcomes (actions, payoffs), rounded for set math."""
    return {
        (
            tuple(round(a, decimals) for a in r.actions),
            tuple(round(p, decimals) for p in r.payoffs),
        )
        for r in records
    }


def commitment_equilibria(
    game: BaseGame,
    grid: StrategyGrid,
    template: MechanismTemplate = MechanismTemplate(),
    non_exploitable_only: bool = False,
) -> EquilibriumReport:
    """Enumerate every strategy profile over grid CCFs and classify equilibria.

    A profile is Nash when no unilateral grid deviation strictly improves
    the deviator, and strong when no coalition has a joint grid deviation
    strictly improving every member. Payoffs are the base-game payoffs under
    constrained play at the solved liabilities.
    """
    strategies = grid.strategies(non_exploitable_only)
    s = len(strategies)
    n = game.n_players
    profile_count = s**n
    # Payoff pass solves profile_count scenarios; the strong pass touches
    # every coalition deviation, which dominates the lookup count.
    guard.check_enumeration(profile_count * ((s + 1) ** n))

    outcomes: dict[tuple[int, ...], Outcome] = {}
    for profile in itertools.product(range(s), repeat=n):
        outcomes[profile] = evaluate_outcome(
            game, [strategies[i] for i in profile], template
        )

    def payoff(profile: tuple[int, ...], player: int) -> float:
        return outcomes[profile].payoffs[player]

    nash = []
    strong = []
    coalitions = _nonempty_coalitions(n)
    for profile in sorted(outcomes):
        is_nash = True
        for player in range(n):
            current = payoff(profile, player)
            for alt in range(s):
                if alt == profile[player]:
                    continue
                deviated = profile[:player] + (alt,) + profile[player + 1 :]
                if payoff(deviated, player) > current + PAYOFF_EPS:
                    is_nash = False
                    break
            if not is_nash:
                break
        if not is_nash:
            continue
        record = OutcomeRecord(
            strategy_profile=profile,
            liabilities=outcomes[profile].liabilities,
            actions=outcomes[profile].actions,
            payoffs=outcomes[profile].payoffs,
        )
        nash.append(record)
        is_strong = True
        for coalition in coalitions:
            for deviation in itertools.product(range(s), repeat=len(coalition)):
                deviated = list(profile)
                for member, alt in zip(coalition, deviation):
                    deviated[member] = alt
                deviated = tuple(deviated)
                if deviated == profile:
                    continue
                if all(
                    payoff(deviated, m) > payoff(profile, m) + PAYOFF_EPS
                    for m in coalition
                ):
                    is_strong = False
                    break
            if not is_strong:
                break
        if is_strong:
            strong.append(record)
    return EquilibriumReport(
        strategies=tuple(strategies), nash=tuple(nash), strong=tuple(strong)
    )
