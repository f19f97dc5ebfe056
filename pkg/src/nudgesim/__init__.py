"""Misinformation-tagging equilibria and comment-cascade simulation.

The package splits into game primitives (:mod:`nudgesim.game`), the
effort-incentive layer with optimality certificates
(:mod:`nudgesim.equilibrium`), the comment cascade and its mean-field
limit (:mod:`nudgesim.branching`), a finite-game equilibrium verifier
(:mod:`nudgesim.finite_pbe`), and the experiment harness plus CLI
(:mod:`nudgesim.harness`, ``nudgesim``).
"""

from .backend import active_backend, set_backend
from .branching import (
    BranchingState,
    CascadeConfig,
    CommentFactors,
    Trajectory,
    integrate_ode,
    ode_rhs,
    sample_offspring,
    simulate,
    simulate_many,
    stationary_point,
    stationary_trend,
    step,
    terminal_statistics,
    trend_from_belief,
)
from .equilibrium import (
    CostFunction,
    EffortBound,
    EquilibriumReport,
    IncentiveFunctional,
    LagrangianCertificate,
    feasibility_margin,
    fit_lagrangian,
    fully_informative_value,
    hybrid_distribution,
    ic_residual,
    max_implementable_effort,
    optimal_policy,
    sender_value_of,
    verify_certificate,
)
from .errors import (
    ConfigError,
    DegenerateError,
    ExtinctError,
    InfeasibleError,
    InvalidEffortError,
    NoPositiveEffortError,
    NotOptimalError,
    NotPlausibleError,
    NudgesimError,
    NullSignalError,
    SubcriticalWarning,
)
from .finite_pbe import (
    FiniteGame,
    PBEReport,
    StrategyTriple,
    best_response_actions,
    binary_to_finite,
    deterministic_kernels,
    is_pbe,
    load_game,
    posterior_matrix,
    receiver_br_satisfied,
    sender_opt_satisfied,
    sender_response_locked_gap,
    sender_value,
)
from .game import (
    FeasibleInterval,
    GameConfig,
    MisperceptionMatrix,
    PosteriorDistribution,
    TaggingPolicy,
    agent_belief_payoff,
    feasible_interval,
    policy_to_posteriors,
    posterior,
    posteriors_to_policy,
    prior_of,
    receiver_best_response,
    receiver_utility,
    sender_belief_value,
)
from .harness import (
    RunResult,
    Scenario,
    builtin_suite,
    load_scenarios,
    run_scenario,
    run_suite,
    verify_certificates,
)

__version__ = "0.1.0"
