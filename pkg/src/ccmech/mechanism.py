"""Liability computation from submitted commitment functions.

The basic mechanism returns the largest feasible action profile: the unique
componentwise-maximal a* with a*_i <= c_i(aggregate(a*)) for every player i.
It is the greatest fixed point of the monotone map

    M(a)_i = evaluate_ccf(c_i, aggregate(a, i))

and is computed by iterating a <- M(a) downward from M(top). Feasible
profiles are closed under join (both M and the aggregate are monotone),
which is what makes the largest one unique.

Two appendix variants replace "largest" for step-only scenarios:

* prioritized - each player's point order expresses a preference; the result
  is the join of every player's favourite feasible point-combination, which
  lets players steer outcomes back down toward the Pareto frontier.
* borda - the favourite-supremum step is replaced by Borda scoring over the
  feasible point-combinations, so a single player's misprioritization cannot
  drag the outcome upward.

A third option preprocesses submissions by replacing flagged players'
top-priority points with the mean of everyone else's, which collapses the
equilibrium-selection problem when all players opt in.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from . import guard
from .actions import (
    EPS_CMP,
    Action,
    ActionSpace,
    Ordering,
    Profile,
    is_leq,
    join_profiles,
    leq,
    profiles_eq,
)
from .ccf import (
    CCF,
    DEFAULT_K_MAX,
    Aggregator,
    MatchingCCF,
    OfferPoint,
    StepCCF,
    aggregate,
    evaluate_ccf,
    validate_ccf,
)
from .errors import NonConvergenceError, ScenarioValidationError

VARIANTS = ("basic", "prioritized", "borda")

DEFAULT_EPS_FIX = 1e-9
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class Submission:
    ccf: CCF
    adjust_to_mean: bool = False


@dataclass(frozen=True)
class Scenario:
    """Players, action space, submissions, aggregator and solver settings."""

    players: tuple[str, ...]
    space: ActionSpace
    submissions: tuple[Submission, ...]
    agg: Aggregator = Aggregator()
    variant: str = "basic"
    eps_fix: float = DEFAULT_EPS_FIX
    max_iter: int = DEFAULT_MAX_ITER
    k_max: int = DEFAULT_K_MAX

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "submissions", tuple(self.submissions))
        if not self.players:
            raise ScenarioValidationError("at least one player required")
        if len(set(self.players)) != len(self.players):
            raise ScenarioValidationError(f"duplicate player names: {self.players}")
        if len(self.submissions) != len(self.players):
            raise ScenarioValidationError(
                f"{len(self.submissions)} submissions for {len(self.players)} players"
            )
        if self.variant not in VARIANTS:
            raise ScenarioValidationError(
                f"variant must be one of {VARIANTS}, got {self.variant!r}"
            )
        if not (self.eps_fix > 0):
            raise ScenarioValidationError(f"eps_fix must be > 0, got {self.eps_fix}")
        if self.max_iter < 1:
            raise ScenarioValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        self.agg.resolved_weights(len(self.players))
        for name, sub in zip(self.players, self.submissions):
            violations = validate_ccf(
                sub.ccf, self.space, self._player_index(name), self.k_max
            )
            if violations:
                raise ScenarioValidationError(
                    f"player {name}: " + "; ".join(violations)
                )

    def _player_index(self, name: str) -> int:
        return self.players.index(name)

    @property
    def n_players(self) -> int:
        return len(self.players)

    def bottom_profile(self) -> Profile:
        return Profile(tuple(self.space.bottom(i) for i in range(self.n_players)))

    def top_profile(self) -> Profile:
        return Profile(tuple(self.space.top(i) for i in range(self.n_players)))


@dataclass(frozen=True)
class Liabilities:
    """Solver output: the binding lower bounds on subsequent play.

    `binding[i]` is the lowest index of a step point whose offer equals
    player i's liability, None when the liability is bottom-by-default, a
    proper join of several offers, or comes from a matching function.
    """

    profile: Profile
    binding: tuple[Optional[int], ...]
    iterations: int


def _commitment_map(scenario: Scenario, profile: Profile) -> Profile:
    out = []
    for i in range(scenario.n_players):
        g = aggregate(profile, i, scenario.agg)
        out.append(evaluate_ccf(scenario.submissions[i].ccf, g, scenario.space.bounds(i)))
    return Profile(tuple(out))


def check_feasible(profile: Profile, scenario: Scenario, eps: float = EPS_CMP) -> bool:
    """True iff every player's action is covered by their own commitment."""
    if profile.n_players != scenario.n_players:
        raise ValueError(
            f"profile has {profile.n_players} players, scenario {scenario.n_players}"
        )
    committed = _commitment_map(scenario, profile)
    return all(
        is_leq(a, c, eps) for a, c in zip(profile.actions, committed.actions)
    )


def _binding_indices(scenario: Scenario, profile: Profile) -> tuple[Optional[int], ...]:
    out = []
    for i in range(scenario.n_players):
        ccf = scenario.submissions[i].ccf
        index = None
        if isinstance(ccf, StepCCF):
            for j, point in enumerate(ccf.points):
                if leq(point.offer, profile.actions[i]) is Ordering.EQ:
                    index = j
                    break
        out.append(index)
    return tuple(out)


def _max_residual(p: Profile, q: Profile) -> float:
    return max(
        abs(x - y)
        for a, b in zip(p.actions, q.actions)
        for x, y in zip(a.components, b.components)
    )


def solve_largest_feasible(scenario: Scenario) -> Liabilities:
    """Greatest fixed point of the commitment map, iterated down from top.

    The iterate sequence starts at M(top) (one free step; same limit by
    monotonicity) and is componentwise weakly decreasing. Step-only
    scenarios terminate exactly within (total submitted points + 1)
    iterations; matching functions converge geometrically and raise
    NonConvergenceError if `max_iter` is exhausted first.
    """
    current = _commitment_map(scenario, scenario.top_profile())
    iterations = 0
    for _ in range(scenario.max_iter):
        nxt = _commitment_map(scenario, current)
        iterations += 1
        if profiles_eq(current, nxt, scenario.eps_fix):
            return Liabilities(
                profile=nxt,
                binding=_binding_indices(scenario, nxt),
                iterations=iterations,
            )
        current = nxt
    raise NonConvergenceError(iterations, _max_residual(current, _commitment_map(scenario, current)))


def _require_step_only(scenario: Scenario, operation: str) -> list[StepCCF]:
    ccfs = []
    for name, sub in zip(scenario.players, scenario.submissions):
        if not isinstance(sub.ccf, StepCCF):
            raise ScenarioValidationError(
                f"{operation} requires step CCFs only; player {name} submitted "
                f"{type(sub.ccf).__name__}"
            )
        ccfs.append(sub.ccf)
    return ccfs


#: In a point assignment, None stands for "no point realized": the player
#: contributes their bottom action, mirroring an unmatched unilateral bill.
Assignment = tuple[Optional[int], ...]


def enumerate_feasible_combinations(
    scenario: Scenario,
) -> list[tuple[Assignment, Profile]]:
    """All feasible ways of giving each player one of their points or none.

    An assignment induces the profile of assigned offers (bottom for None)
    and is feasible iff that profile passes check_feasible. The all-None
    assignment is always feasible, so the result is never empty.
    """
    ccfs = _require_step_only(scenario, "combination enumeration")
    total = 1
    for ccf in ccfs:
        total *= ccf.k + 1
    guard.check_enumeration(total)
    options: list[list[Optional[int]]] = [
        [None] + list(range(ccf.k)) for ccf in ccfs
    ]
    feasible = []
    for assignment in itertools.product(*options):
        actions = []
        for i, choice in enumerate(assignment):
            if choice is None:
                actions.append(scenario.space.bottom(i))
            else:
                actions.append(ccfs[i].points[choice].offer)
        profile = Profile(tuple(actions))
        if check_feasible(profile, scenario):
            feasible.append((assignment, profile))
    return feasible


def _priority_rank(choice: Optional[int], k: int) -> int:
    # None ranks strictly worse than any submitted point.
    return k if choice is None else choice


def solve_prioritized(scenario: Scenario) -> Liabilities:
    """Join of all players' favourite feasible point-combinations.

    A player's favourite combinations are the feasible ones assigning them
    their best-priority point (None worst); their favourite profile is the
    join of those combinations' induced profiles. The overall result is the
    join across players, returned without re-imposing feasibility (the
    variant is defined as a supremum; callers can apply check_feasible).
    """
    ccfs = _require_step_only(scenario, "prioritized solve")
    feasible = enumerate_feasible_combinations(scenario)
    result = scenario.bottom_profile()
    for i in range(scenario.n_players):
        best = min(_priority_rank(a[i], ccfs[i].k) for a, _ in feasible)
        favourite = None
        for assignment, profile in feasible:
            if _priority_rank(assignment[i], ccfs[i].k) == best:
                favourite = profile if favourite is None else join_profiles(favourite, profile)
        result = join_profiles(result, favourite)
    return Liabilities(
        profile=result,
        binding=_binding_indices(scenario, result),
        iterations=len(feasible),
    )


def _average_ranks(keys: Sequence[int]) -> list[float]:
    """Ranks 0..m-1 by ascending key; ties share the average rank."""
    order = sorted(range(len(keys)), key=lambda idx: keys[idx])
    ranks = [0.0] * len(keys)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and keys[order[end + 1]] == keys[order[pos]]:
            end += 1
        shared = (pos + end) / 2.0
        for idx in order[pos : end + 1]:
            ranks[idx] = shared
        pos = end + 1
    return ranks


def solve_borda(scenario: Scenario) -> Liabilities:
    """Borda scoring over feasible combinations using players' point orders.

    Each player ranks the m feasible assignments by the priority index of
    their own assigned point (None last, ties share the average rank); an
    assignment scores sum_i (m - 1 - rank_i). Score ties break toward the
    smaller componentwise profile sum, then enumeration order, keeping the
    variant's anti-over-mitigation intent.
    """
    ccfs = _require_step_only(scenario, "borda solve")
    feasible = enumerate_feasible_combinations(scenario)
    m = len(feasible)
    scores = [0.0] * m
    for i in range(scenario.n_players):
        keys = [_priority_rank(a[i], ccfs[i].k) for a, _ in feasible]
        for idx, rank in enumerate(_average_ranks(keys)):
            scores[idx] += (m - 1) - rank
    best = None
    for idx, (_, profile) in enumerate(feasible):
        key = (
            -scores[idx],
            math.fsum(c for a in profile.actions for c in a.components),
            idx,
        )
        if best is None or key < best[0]:
            best = (key, profile)
    profile = best[1]
    return Liabilities(
        profile=profile,
        binding=_binding_indices(scenario, profile),
        iterations=m,
    )


def _clip_action(action: Action, bounds: Sequence[tuple[float, float]]) -> Action:
    return Action(
        tuple(min(max(c, lo), hi) for c, (lo, hi) in zip(action.components, bounds))
    )


def preprocess_adjust_to_mean(scenario: Scenario) -> Scenario:
    """Replace flagged players' top points by the mean of the others'.

    Offers and thresholds are averaged separately over all other players'
    point-0 entries (from the pre-update submissions, so replacements are
    simultaneous); the mean offer is clipped into the flagged player's own
    bounds. With no flags set this is the identity.
    """
    if not any(sub.adjust_to_mean for sub in scenario.submissions):
        return scenario
    ccfs = _require_step_only(scenario, "adjust-to-mean preprocessing")
    if scenario.n_players < 2:
        raise ScenarioValidationError(
            "adjust-to-mean needs at least two players (no others to average)"
        )
    new_submissions = []
    for i, sub in enumerate(scenario.submissions):
        if not sub.adjust_to_mean:
            new_submissions.append(sub)
            continue
        others = [ccfs[j].points[0] for j in range(scenario.n_players) if j != i]
        n_dims = scenario.space.n_dims
        mean_offer = Action(
            tuple(
                math.fsum(p.offer[d] for p in others) / len(others)
                for d in range(n_dims)
            )
        )
        mean_threshold = tuple(
            math.fsum(p.threshold[d] for p in others) / len(others)
            for d in range(n_dims)
        )
        new_point = OfferPoint(
            offer=_clip_action(mean_offer, scenario.space.bounds(i)),
            threshold=mean_threshold,
        )
        new_ccf = StepCCF((new_point,) + ccfs[i].points[1:])
        new_submissions.append(replace(sub, ccf=new_ccf))
    return replace(scenario, submissions=tuple(new_submissions))


def solve(scenario: Scenario) -> Liabilities:
    """Apply adjust-to-mean preprocessing, then the scenario's variant."""
    scenario = preprocess_adjust_to_mean(scenario)
    if scenario.variant == "basic":
        return solve_largest_feasible(scenario)
    if scenario.variant == "prioritized":
        return solve_prioritized(scenario)
    return solve_borda(scenario)
