"""Trajectory metric toolkit: exact solvers, a fast entropy-regularized
approximation, a synthetic scenario generator, and a benchmark CLI."""

from ._backend import active_backend, get_kernels
from .costs import (
    Kernels,
    Marginals,
    SwitchParams,
    base_cost,
    build_frame_costs,
    build_kernels,
    build_marginals,
    epsilon_from_eta,
    switch_cost,
)
from .exact import (
    BudgetExceededError,
    ExactResult,
    ExactSolveError,
    PlanConstraintError,
    all_dummy_objective,
    brute_force_tgospa,
    count_matchings,
    enumerate_matchings,
    evaluate_plan_objective,
    plan_is_integral,
    plan_violations,
    solve_gospa_frame,
    solve_relaxed_lp,
    tgospa_metric,
)
from .generator import GenParams, derive_seed, generate_scenario, sweep_params
from .model import (
    Config,
    Scenario,
    ScenarioFormatError,
    ScenarioValidationError,
    Trajectory,
    load_scenario,
    save_scenario,
    validate_scenario,
)
from .sinkhorn import (
    DualValue,
    LogPotentials,
    Messages,
    SinkhornInfeasibleError,
    SinkhornNumericalError,
    SolveReport,
    SolverState,
    backward_pass,
    dual_objective,
    forward_step,
    primal_objective,
    project_pair,
    project_single,
    run_sinkhorn,
    update_potentials_at,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "Config",
    "DualValue",
    "ExactResult",
    "ExactSolveError",
    "GenParams",
    "Kernels",
    "LogPotentials",
    "Marginals",
    "Messages",
    "PlanConstraintError",
    "Scenario",
    "ScenarioFormatError",
    "ScenarioValidationError",
    "SinkhornInfeasibleError",
    "SinkhornNumericalError",
    "SolveReport",
    "SolverState",
    "SwitchParams",
    "Trajectory",
    "active_backend",
    "all_dummy_objective",
    "backward_pass",
    "base_cost",
    "brute_force_tgospa",
    "build_frame_costs",
    "build_kernels",
    "build_marginals",
    "count_matchings",
    "derive_seed",
    "dual_objective",
    "enumerate_matchings",
    "epsilon_from_eta",
    "evaluate_plan_objective",
    "forward_step",
    "generate_scenario",
    "get_kernels",
    "load_scenario",
    "plan_is_integral",
    "plan_violations",
    "primal_objective",
    "project_pair",
    "project_single",
    "run_sinkhorn",
    "save_scenario",
    "solve_gospa_frame",
    "solve_relaxed_lp",
    "sweep_params",
    "switch_cost",
    "tgospa_metric",
    "update_potentials_at",
    "validate_scenario",
]
