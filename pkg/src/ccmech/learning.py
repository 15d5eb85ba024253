"""Learning dynamics over the commitment game.

Two learners operate on grid-encoded step CCFs:

* :func:`better_response_dynamics` - round-robin revision with randomized
  order. A revising player adopts the first candidate CCF that strictly
  improves their own payoff, scanning reciprocity candidates (copies of
  other players' offers - accepting a standing offer) before randomly
  sampled grid CCFs. When nothing improves strictly, the player may make a
  payoff-neutral "conditional proposal": prepend a tight point (offer =
  threshold = level) for the level they would most like everyone to match,
  provided current liabilities are untouched and their offered ambition
  strictly rises. Proposals are what let play escape the zero-liability
  equilibrium, where no unilateral revision can strictly improve anything;
  adoptions alone provably never leave it.

* :func:`policy_gradient_train` - an episodic score-function learner with a
  per-player softmax over the grid strategies and a running-mean baseline,
  standing in for neural RL agents. Rewards can be shaped by temporary
  altruism: r'_i = (1-alpha) r_i + alpha * mean(r), with every schedule
  forcing alpha = 0 over the final third of training.

Candidates are restricted to the non-exploitable set (each point's
threshold at least its offer: never commit to more than the aggregate
condition demands) unless the toggle is off. Runs are deterministic given
their seed; independent seeds can execute concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .actions import EPS_CMP, Action, profiles_eq, Profile
from .analysis import (
    MechanismTemplate,
    Outcome,
    PAYOFF_EPS,
    StrategyGrid,
    evaluate_outcome,
    scalar_space,
    welfare,
)
from .ccf import OfferPoint, StepCCF, validate_ccf
from .games import BaseGame
from .hashing import short_hash

SCHEDULE_KINDS = ("constantThenZero", "linearDecayThenZero")


def derive_seeds(master: int, count: int) -> list[int]:
    """Split `count` run seeds from a master seed, counter-based.

    Run i's seed is the first output word of numpy's SeedSequence with
    entropy `master` and spawn key (i,), so adding runs never perturbs
    existing ones.
    """
    return [
        int(np.random.SeedSequence(master, spawn_key=(i,)).generate_state(1)[0])
        for i in range(count)
    ]


@dataclass(frozen=True)
class AltruismSchedule:
    """Altruism weight over training; zero for the whole final third."""

    kind: str
    alpha0: float
    total_episodes: int

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"kind must be one of {SCHEDULE_KINDS}, got {self.kind!r}")
        if not (0.0 <= self.alpha0 <= 1.0):
            raise ValueError(f"alpha0 must be in [0, 1], got {self.alpha0}")
        if self.total_episodes < 1:
            raise ValueError(f"total_episodes must be >= 1, got {self.total_episodes}")

    @property
    def cutoff(self) -> int:
        """First episode of the zero-altruism final third."""
        return math.ceil(2 * self.total_episodes / 3)


def alpha_at(schedule: AltruismSchedule, episode: int) -> float:
    if not (0 <= episode < schedule.total_episodes):
        raise ValueError(
            f"episode {episode} outside [0, {schedule.total_episodes})"
        )
    if episode >= schedule.cutoff:
        return 0.0
    if schedule.kind == "constantThenZero":
        return schedule.alpha0
    return schedule.alpha0 * (1.0 - episode / schedule.cutoff)


def shaped_reward(payoffs: Sequence, alpha):
    """Blend each reward with the population mean: (1-a) r_i + a * mean(r).

    The total is conserved for any alpha. Plain arithmetic, so exact types
    (e.g. fractions.Fraction) pass through exactly.
    """
    if not (0 <= alpha <= 1):
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    mean = sum(payoffs) / len(payoffs)
    return tuple((1 - alpha) * r + alpha * mean for r in payoffs)


@dataclass(frozen=True)
class DynamicsConfig:
    grid: StrategyGrid
    max_rounds: int = 60
    candidate_samples: int = 48
    seed: int = 0
    non_exploitable_only: bool = True

    def __post_init__(self):
        if self.max_rounds < 1 or self.candidate_samples < 1:
            raise ValueError("max_rounds and candidate_samples must be >= 1")


@dataclass(frozen=True)
class EpisodeRecord:
    index: int
    strategies: tuple[tuple[tuple[float, float], ...], ...]
    liabilities: tuple[float, ...]
    payoffs: tuple[float, ...]
    shaped: tuple[float, ...]
    welfare: float
    alpha: float
    adoptions: int = 0
    proposals: int = 0


@dataclass(frozen=True)
class Trajectory:
    records: tuple[EpisodeRecord, ...]
    seed: int
    config_hash: str
    converged: bool
    terminal_welfare: float


def _ccf_summary(ccf: StepCCF) -> tuple[tuple[float, float], ...]:
    return tuple((p.offer.components[0], p.threshold[0]) for p in ccf.points)


def _ambition(ccf: StepCCF) -> float:
    return math.fsum(p.offer.components[0] for p in ccf.points)


def _tight_point(level: float) -> OfferPoint:
    return OfferPoint(offer=Action((level,)), threshold=(level,))


def _game_fingerprint(game: BaseGame):
    params = getattr(game, "params", None)
    return params if params is not None else type(game).__name__


def _record(index: int, ccfs: Sequence[StepCCF], outcome: Outcome,
            alpha: float = 0.0, adoptions: int = 0, proposals: int = 0,
            shaped: Optional[tuple] = None) -> EpisodeRecord:
    return EpisodeRecord(
        index=index,
        strategies=tuple(_ccf_summary(c) for c in ccfs),
        liabilities=outcome.liabilities,
        payoffs=outcome.payoffs,
        shaped=outcome.payoffs if shaped is None else shaped,
        welfare=welfare(outcome.payoffs),
        alpha=alpha,
        adoptions=adoptions,
        proposals=proposals,
    )


def _sample_ccf(rng: np.random.Generator, grid: StrategyGrid,
                non_exploitable_only: bool) -> StepCCF:
    points = []
    for _ in range(grid.k):
        a = grid.action_levels[rng.integers(len(grid.action_levels))]
        if non_exploitable_only:
            thresholds = [t for t in grid.threshold_levels if t >= a - EPS_CMP]
        else:
            thresholds = list(grid.threshold_levels)
        t = thresholds[rng.integers(len(thresholds))]
        points.append((a, t))
    points.sort(key=lambda p: (-p[0], -p[1]))
    return StepCCF(tuple(OfferPoint(offer=Action((a,)), threshold=(t,)) for a, t in points))


def better_response_dynamics(
    game: BaseGame,
    config: DynamicsConfig,
    template: MechanismTemplate = MechanismTemplate(),
    start: Optional[Sequence[StepCCF]] = None,
) -> Trajectory:
    """Run randomized round-robin better response; see the module docstring.

    Starts from all-bottom CCFs unless `start` is given. Terminates when a
    full sweep produces neither an adoption nor a proposal, or after
    `max_rounds` sweeps (non-termination is a recorded outcome, not an
    error).
    """
    grid = config.grid
    if max(grid.threshold_levels) < max(grid.action_levels) - EPS_CMP:
        raise ValueError("grid must offer a threshold >= every action level")
    n = game.n_players
    rng = np.random.default_rng(config.seed)
    space = scalar_space(game)

    if start is not None:
        ccfs = list(start)
    else:
        ccfs = [
            StepCCF(tuple(_tight_point(space.bounds(i)[0][0]) for _ in range(grid.k)))
            for i in range(n)
        ]

    def outcome_of(current: Sequence[StepCCF]) -> Outcome:
        return evaluate_outcome(game, current, template)

    def matched_payoff(player: int, level: float) -> float:
        actions = game.constrained_play(tuple(level for _ in range(n)))
        return game.payoffs(actions)[player]

    outcome = outcome_of(ccfs)
    records = [_record(0, ccfs, outcome)]
    converged = False

    for sweep in range(1, config.max_rounds + 1):
        adoptions = 0
        proposals = 0
        order = rng.permutation(n)
        for player in order:
            player = int(player)
            current_payoff = outcome.payoffs[player]

            candidates: list[StepCCF] = []
            for other in range(n):
                if other == player:
                    continue
                candidates.append(ccfs[other])
                if ccfs[other].k > 1:
                    candidates.extend(StepCCF((p,)) for p in ccfs[other].points)
            for _ in range(config.candidate_samples):
                candidates.append(_sample_ccf(rng, grid, config.non_exploitable_only))

            adopted = False
            for candidate in candidates:
                if candidate == ccfs[player]:
                    continue
                if validate_ccf(candidate, space, player, k_max=max(4, grid.k)):
                    continue
                trial = list(ccfs)
                trial[player] = candidate
                trial_outcome = outcome_of(trial)
                if trial_outcome.payoffs[player] > current_payoff + PAYOFF_EPS:
                    ccfs = trial
                    outcome = trial_outcome
                    adoptions += 1
                    adopted = True
                    break
            if adopted:
                continue

            # Conditional proposal: prepend the tight point for the level this
            # player would most like matched, as long as it leaves current
            # liabilities untouched and strictly raises their offered ambition.
            levels = [
                lv
                for lv in grid.action_levels
                if lv in grid.threshold_levels
                and matched_payoff(player, lv) > current_payoff + PAYOFF_EPS
            ]
            levels.sort(key=lambda lv: -matched_payoff(player, lv))
            for level in levels:
                points = (_tight_point(level),) + ccfs[player].points[: grid.k - 1]
                candidate = StepCCF(points[: grid.k])
                if candidate == ccfs[player]:
                    continue
                if _ambition(candidate) <= _ambition(ccfs[player]) + EPS_CMP:
                    continue
                if validate_ccf(candidate, space, player, k_max=max(4, grid.k)):
                    continue
                trial = list(ccfs)
                trial[player] = candidate
                trial_outcome = outcome_of(trial)
                liabilities_kept = profiles_eq(
                    Profile(tuple(Action((x,)) for x in trial_outcome.liabilities)),
                    Profile(tuple(Action((x,)) for x in outcome.liabilities)),
                )
                if liabilities_kept:
                    ccfs = trial
                    outcome = trial_outcome
                    proposals += 1
                    break

        records.append(_record(sweep, ccfs, outcome, adoptions=adoptions,
                               proposals=proposals))
        if adoptions == 0 and proposals == 0:
            converged = True
            break

    return Trajectory(
        records=tuple(records),
        seed=config.seed,
        config_hash=short_hash({"game": _game_fingerprint(game),
                                "config": config, "template": template,
                                "algo": "br"}),
        converged=converged,
        terminal_welfare=records[-1].welfare,
    )


@dataclass(frozen=True)
class TrainConfig:
    grid: StrategyGrid
    schedule: AltruismSchedule
    learning_rate: float = 12.0
    baseline_decay: float = 0.05
    seed: int = 0
    non_exploitable_only: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (0 < self.baseline_decay <= 1):
            raise ValueError(
                f"baseline_decay must be in (0, 1], got {self.baseline_decay}"
            )


def policy_gradient_train(
    game: BaseGame,
    config: TrainConfig,
    template: MechanismTemplate = MechanismTemplate(),
) -> Trajectory:
    """Train softmax policies over grid CCF strategies with REINFORCE.

    One episode = one play of the commitment game. Updates use the shaped
    reward minus a per-player running-mean baseline. A final greedy
    (argmax-policy) evaluation is appended as the trajectory's last record
    and defines the terminal welfare.
    """
    strategies = config.grid.strategies(config.non_exploitable_only)
    s = len(strategies)
    n = game.n_players
    episodes = config.schedule.total_episodes
    rng = np.random.default_rng(config.seed)
    logits = np.zeros((n, s))
    baselines = np.zeros(n)
    cache: dict[tuple[int, ...], Outcome] = {}

    def outcome_at(profile: tuple[int, ...]) -> Outcome:
        cached = cache.get(profile)
        if cached is None:
            cached = evaluate_outcome(game, [strategies[i] for i in profile], template)
            cache[profile] = cached
        return cached

    records = []
    for episode in range(episodes):
        alpha = alpha_at(config.schedule, episode)
        probs = np.empty((n, s))
        chosen = []
        for i in range(n):
            z = logits[i] - logits[i].max()
            p = np.exp(z)
            p /= p.sum()
            probs[i] = p
            chosen.append(int(rng.choice(s, p=p)))
        profile = tuple(chosen)
        outcome = outcome_at(profile)
        shaped = shaped_reward(outcome.payoffs, alpha)
        if episode == 0:
            baselines[:] = shaped
        advantages = np.array(shaped) - baselines
        baselines += config.baseline_decay * (np.array(shaped) - baselines)
        for i in range(n):
            grad = -probs[i]
            grad[profile[i]] += 1.0
            logits[i] += config.learning_rate * advantages[i] * grad
        records.append(
            _record(
                episode,
                [strategies[i] for i in profile],
                outcome,
                alpha=alpha,
                shaped=shaped,
            )
        )

    greedy = tuple(int(np.argmax(logits[i])) for i in range(n))
    final = outcome_at(greedy)
    records.append(
        _record(episodes, [strategies[i] for i in greedy], final, alpha=0.0)
    )
    return Trajectory(
        records=tuple(records),
        seed=config.seed,
        config_hash=short_hash({"game": _game_fingerprint(game),
                                "config": config, "template": template,
                                "algo": "pg"}),
        converged=True,
        terminal_welfare=records[-1].welfare,
    )
