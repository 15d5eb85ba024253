"""Conditional commitment mechanism toolkit.

Players submit conditional commitment functions instead of actions; the
mechanism turns them into binding liabilities by computing the largest
feasible action profile. The package bundles the solver and its variants,
a public goods base game with closed forms, brute-force equilibrium oracles,
learning dynamics, and a CLI harness.
"""

from .actions import (
    EPS_CMP,
    Action,
    ActionSpace,
    Ordering,
    Profile,
    VariableSpec,
    join,
    leq,
    meet,
    tariff_cap,
)
from .ccf import (
    Aggregator,
    MatchingCCF,
    OfferPoint,
    StepCCF,
    aggregate,
    evaluate_ccf,
    validate_ccf,
)
from .errors import (
    ClippedRegimeError,
    EnumerationGuardError,
    NonConvergenceError,
    ScenarioFormatError,
    ScenarioValidationError,
)
from .games import (
    PublicGoodsGame,
    PublicGoodsParams,
    REFERENCE_PARAMS,
    constrained_play,
    pg_closed_form_payoffs,
    pg_nash,
    pg_payoffs,
    pg_social_optimum,
    reference_game,
)
from .mechanism import (
    Liabilities,
    Scenario,
    Submission,
    check_feasible,
    enumerate_feasible_combinations,
    preprocess_adjust_to_mean,
    solve,
    solve_borda,
    solve_largest_feasible,
    solve_prioritized,
)
from .analysis import (
    EquilibriumReport,
    MechanismTemplate,
    StrategyGrid,
    commitment_equilibria,
    core_membership,
    evaluate_outcome,
    is_individually_rational,
    pareto_front,
    welfare,
)
from .learning import (
    AltruismSchedule,
    DynamicsConfig,
    TrainConfig,
    Trajectory,
    alpha_at,
    better_response_dynamics,
    derive_seeds,
    policy_gradient_train,
    shaped_reward,
)
from .scenario_io import load_scenario, parse_scenario, scenario_to_dict

__version__ = "0.1.0"
