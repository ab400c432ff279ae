"""Fast approximation of the relaxed trajectory metric.

The relaxed metric is an optimal-transport problem over a tensor with one
(truth, estimate) pair index per time step.  Adding an entropy term makes
the dual block-coordinate ascent (Sinkhorn) applicable, and because mass can
never change truth row between steps, the marginals needed for each dual
update reduce to forward/backward message recursions over column indices --
O(T * m * n^2) per sweep instead of exponential in T.

All iterates live in the log domain; every reduction is a max-shifted
log-sum-exp.  One "iteration" is a full sweep: a backward message pass, then
a forward sweep interleaving the per-step potential updates with forward
message extension.  Within a sweep each update uses exact marginals: the
backward messages at step t depend only on potentials at later steps, which
the forward sweep has not yet touched.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ._backend import get_kernels
from .costs import (
    Kernels,
    Marginals,
    SwitchParams,
    build_frame_costs,
    build_kernels,
    build_marginals,
    epsilon_from_eta,
)
from .exact import all_dummy_objective
from .model import Config, Scenario, validate_scenario


class SinkhornInfeasibleError(RuntimeError):
    """A projected marginal vanished where the target is positive."""


class SinkhornNumericalError(FloatingPointError):
    """NaN encountered in a projection or objective."""


@dataclass
class LogPotentials:
    """Transformed dual variables in the log domain.

    log_u scales truth rows (shape (T, m+1)), log_v scales estimate columns
    (shape (T, n+1)); both stay finite throughout the iteration.
    """

    log_u: np.ndarray
    log_v: np.ndarray

    @classmethod
    def zeros(cls, T: int, m1: int, n1: int) -> "LogPotentials":
        return cls(log_u=np.zeros((T, m1)), log_v=np.zeros((T, n1)))

    def copy(self) -> "LogPotentials":
        return LogPotentials(self.log_u.copy(), self.log_v.copy())


@dataclass
class Messages:
    """Forward/backward partial contractions of the scaled kernel tensor.

    log_fwd[0] and log_bwd[T-1] are identically zero (boundary conditions).
    """

    log_fwd: np.ndarray  # (T, m+1, n+1)
    log_bwd: np.ndarray  # (T, m+1, n+1)


@dataclass
class DualValue:
    """Dual objective split into the potential-dependent part and the
    iteration-independent constant epsilon * (m+1)^T * (n+1)^T, kept as a
    log magnitude because it overflows for moderate T."""

    phi_tilde: float
    log_const: float

    @property
    def total(self) -> float:
        return self.phi_tilde + math.exp(self.log_const)


@dataclass
class SolverState:
    """Converged internal state, in the orientation actually solved
    (rows are the larger trajectory set)."""

    frame_costs: np.ndarray
    switch: SwitchParams
    marginals: Marginals
    kernels: Kernels
    potentials: LogPotentials
    messages: Messages


@dataclass
class SolveReport:
    iterations: int
    primal_objective: float
    dual_phi_tilde: float
    dual_const_log: float
    marginal_residual_inf: float
    step_size: float
    converged: bool
    wall_time: float
    epsilon: float
    phi_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    trace: list[tuple[int, float, float, float]] | None = None
    state: SolverState | None = None

    @property
    def dual_objective(self) -> float:
        return self.dual_phi_tilde + math.exp(self.dual_const_log)


def backward_pass(
    kernels: Kernels, potentials: LogPotentials, backend: str | None = None
) -> np.ndarray:
    """All backward messages, computed from the last step down to the first."""
    impl = get_kernels(backend)
    T = kernels.T
    m1, n1 = kernels.shape
    log_bwd = np.zeros((T, m1, n1))
    for t in range(T - 2, -1, -1):
        B = (
            log_bwd[t + 1]
            + kernels.log_k[t + 1]
            + potentials.log_u[t + 1][:, None]
            + potentials.log_v[t + 1][None, :]
        )
        log_bwd[t] = impl.lse_transition(B, kernels.log_transition_real)
    return log_bwd


def forward_step(
    log_fwd_t: np.ndarray,
    t: int,
    kernels: Kernels,
    potentials: LogPotentials,
    backend: str | None = None,
) -> np.ndarray:
    """Forward message at step t+1 from the message at step t."""
    B = (
        log_fwd_t
        + kernels.log_k[t]
        + potentials.log_u[t][:, None]
        + potentials.log_v[t][None, :]
    )
    return get_kernels(backend).lse_transition(B, kernels.log_transition_real)


def log_project_single(
    t: int, messages: Messages, kernels: Kernels, potentials: LogPotentials
) -> np.ndarray:
    return (
        messages.log_fwd[t]
        + kernels.log_k[t]
        + potentials.log_u[t][:, None]
        + potentials.log_v[t][None, :]
        + messages.log_bwd[t]
    )


def project_single(
    t: int, messages: Messages, kernels: Kernels, potentials: LogPotentials
) -> np.ndarray:
    """Mass per (row, column) pair at step t: the tensor's t-th marginal."""
    P = np.exp(log_project_single(t, messages, kernels, potentials))
    if np.isnan(P).any():
        raise SinkhornNumericalError(f"NaN in projection at step {t + 1}")
    return P


def project_pair(
    t: int, messages: Messages, kernels: Kernels, potentials: LogPotentials
) -> np.ndarray:
    """Mass moved between steps t and t+1, shaped (m+1, n+1, n+1).

    Entry (i, j, l) is the mass staying in row i while moving from column j
    to column l; transitions that change row carry no mass and are not
    represented.
    """
    A = (
        messages.log_fwd[t]
        + kernels.log_k[t]
        + potentials.log_u[t][:, None]
        + potentials.log_v[t][None, :]
    )
    Bp = (
        kernels.log_k[t + 1]
        + potentials.log_u[t + 1][:, None]
        + potentials.log_v[t + 1][None, :]
        + messages.log_bwd[t + 1]
    )
    log_pair = A[:, :, None] + Bp[:, None, :]
    log_pair[:-1] += kernels.log_transition_real[None, :, :]
    pair = np.exp(log_pair)
    if np.isnan(pair).any():
        raise SinkhornNumericalError(f"NaN in pair projection at step {t + 1}")
    return pair


def update_potentials_at(
    t: int,
    side: str,
    messages: Messages,
    kernels: Kernels,
    potentials: LogPotentials,
    marginals: Marginals,
) -> LogPotentials:
    """Exact block maximization of the dual at step t, one side at a time.

    side is "rows" or "cols".  After updating both sides at t, the step-t
    marginal constraints hold exactly (up to floating point).  Mutates and
    returns the potentials.
    """
    base = messages.log_fwd[t] + kernels.log_k[t] + messages.log_bwd[t]
    if side == "rows":
        denom = logsumexp(base + potentials.log_v[t][None, :], axis=1)
        if np.any(np.isinf(denom) & (marginals.mu_row > 0)):
            raise SinkhornInfeasibleError(
                f"projected row marginal vanished at step {t + 1}; the transport "
                "problem is infeasible for these kernels"
            )
        potentials.log_u[t] = np.log(marginals.mu_row) - denom
    elif side == "cols":
        denom = logsumexp(base + potentials.log_u[t][:, None], axis=0)
        if np.any(np.isinf(denom) & (marginals.mu_col > 0)):
            raise SinkhornInfeasibleError(
                f"projected column marginal vanished at step {t + 1}; the transport "
                "problem is infeasible for these kernels"
            )
        potentials.log_v[t] = np.log(marginals.mu_col) - denom
    else:
        raise ValueError(f"side must be 'rows' or 'cols', got {side!r}")
    return potentials


def _log_total_mass(
    log_fwd_last: np.ndarray, kernels: Kernels, potentials: LogPotentials
) -> float:
    T = kernels.T
    return float(
        logsumexp(
            log_fwd_last
            + kernels.log_k[T - 1]
            + potentials.log_u[T - 1][:, None]
            + potentials.log_v[T - 1][None, :]
        )
    )


def dual_objective(
    potentials: LogPotentials,
    kernels: Kernels,
    marginals: Marginals,
    backend: str | None = None,
) -> DualValue:
    """Dual value at the given potentials, via the total tensor mass.

    The mass is accumulated through the forward messages, never by
    materializing the tensor.
    """
    T = kernels.T
    m1, n1 = kernels.shape
    log_fwd_t = np.zeros((m1, n1))
    for t in range(T - 1):
        log_fwd_t = forward_step(log_fwd_t, t, kernels, potentials, backend)
    mass = math.exp(_log_total_mass(log_fwd_t, kernels, potentials))
    linear = float(
        marginals.mu_row @ potentials.log_u.sum(axis=0)
        + marginals.mu_col @ potentials.log_v.sum(axis=0)
    )
    phi_tilde = kernels.epsilon * (linear - mass)
    log_const = math.log(kernels.epsilon) + T * (math.log(m1) + math.log(n1))
    return DualValue(phi_tilde=phi_tilde, log_const=log_const)


def primal_objective(
    messages: Messages,
    kernels: Kernels,
    potentials: LogPotentials,
    frame_costs: np.ndarray,
    switch: SwitchParams,
) -> float:
    """Transport cost of the current plan: frame terms plus switch terms.

    Pair-projection mass only exists where the switch cost is finite, so the
    0 * inf convention never produces a NaN here.
    """
    T = kernels.T
    total = 0.0
    for t in range(T):
        total += float((frame_costs[t] * project_single(t, messages, kernels, potentials)).sum())
    tbl = switch.real_row_table()
    for t in range(T - 1):
        pair = project_pair(t, messages, kernels, potentials)
        total += float((pair[:-1] * tbl[None, :, :]).sum())
    if math.isnan(total):
        raise SinkhornNumericalError("NaN in primal objective")
    return total


def _relative_step(
    prev_u: np.ndarray, prev_v: np.ndarray, log_u: np.ndarray, log_v: np.ndarray
) -> float:
    """Euclidean relative change of the concatenated transformed duals.

    Stable: both iterates are exponentiated after subtracting the previous
    iterate's global maximum (a shared shift leaves the ratio invariant, and
    the previous iterate then never overflows).
    """
    all_prev = np.concatenate([prev_u.ravel(), prev_v.ravel()])
    all_cur = np.concatenate([log_u.ravel(), log_v.ravel()])
    shift = all_prev.max()
    with np.errstate(over="ignore"):
        prev = np.exp(all_prev - shift)
        cur = np.exp(all_cur - shift)
        return float(np.linalg.norm(cur - prev) / np.linalg.norm(prev))


def _phi_tilde_from_state(
    log_fwd_last: np.ndarray,
    kernels: Kernels,
    potentials: LogPotentials,
    marginals: Marginals,
) -> float:
    mass = math.exp(_log_total_mass(log_fwd_last, kernels, potentials))
    linear = float(
        marginals.mu_row @ potentials.log_u.sum(axis=0)
        + marginals.mu_col @ potentials.log_v.sum(axis=0)
    )
    return kernels.epsilon * (linear - mass)


def _degenerate_result(scenario: Scenario, cfg: Config, t0: float):
    """Closed form when either trajectory set is empty: everything is
    unassigned and the plan is the unique feasible point."""
    m, n, T = scenario.num_truths, scenario.num_estimates, scenario.T
    objective = all_dummy_objective(scenario, cfg.p, cfg.c)
    projections = np.zeros((T, m + 1, n + 1))
    if n == 0:
        for i, traj in enumerate(scenario.ground_truth):
            projections[:, i, 0] = 1.0
    elif m == 0:
        for j, traj in enumerate(scenario.estimates):
            projections[:, 0, j] = 1.0
    report = SolveReport(
        iterations=0,
        primal_objective=objective,
        dual_phi_tilde=objective,
        dual_const_log=-math.inf,
        marginal_residual_inf=0.0,
        step_size=0.0,
        converged=True,
        wall_time=time.perf_counter() - t0,
        epsilon=cfg.eta,
    )
    return report, projections


def run_sinkhorn(
    scenario: Scenario,
    cfg: Config,
    backend: str | None = None,
    collect_primal_trace: bool = False,
    keep_state: bool = False,
) -> tuple[SolveReport, np.ndarray]:
    """Approximate the relaxed metric objective by dual coordinate ascent.

    Returns the solve report and the final per-step projections, shaped
    (T, m+1, n+1).  When the estimate set is larger than the truth set the
    problem is solved on the swapped scenario (the metric is symmetric) so
    that the per-sweep cost stays O(T * max(m,n) * min(m,n)^2); the returned
    projections are transposed back.
    """
    t0 = time.perf_counter()
    violations = validate_scenario(scenario)
    if violations:
        raise ValueError("invalid scenario: " + "; ".join(violations))
    m, n, T = scenario.num_truths, scenario.num_estimates, scenario.T
    if m == 0 or n == 0:
        return _degenerate_result(scenario, cfg, t0)
    if n > m:
        report, projections = run_sinkhorn(
            scenario.swapped(),
            cfg,
            backend=backend,
            collect_primal_trace=collect_primal_trace,
            keep_state=keep_state,
        )
        return report, projections.transpose(0, 2, 1)

    frame_costs = build_frame_costs(scenario, cfg.p, cfg.c)
    switch = SwitchParams(m=m, n=n, gamma=cfg.gamma, p=cfg.p)
    marginals = build_marginals(m, n)
    epsilon = epsilon_from_eta(cfg.eta, T, frame_costs, switch)
    kernels = build_kernels(frame_costs, switch, epsilon)

    potentials = LogPotentials.zeros(T, m + 1, n + 1)
    messages = Messages(
        log_fwd=np.zeros((T, m + 1, n + 1)), log_bwd=np.zeros((T, m + 1, n + 1))
    )

    phi_history = []
    trace = [] if collect_primal_trace else None
    step = math.inf
    converged = False
    sweeps = 0

    for sweep in range(1, cfg.max_iter + 1):
        prev_u = potentials.log_u.copy()
        prev_v = potentials.log_v.copy()

        messages.log_bwd = backward_pass(kernels, potentials, backend)
        for t in range(T - 1):
            update_potentials_at(t, "rows", messages, kernels, potentials, marginals)
            update_potentials_at(t, "cols", messages, kernels, potentials, marginals)
            messages.log_fwd[t + 1] = forward_step(
                messages.log_fwd[t], t, kernels, potentials, backend
            )
        update_potentials_at(T - 1, "rows", messages, kernels, potentials, marginals)
        update_potentials_at(T - 1, "cols", messages, kernels, potentials, marginals)

        sweeps = sweep
        step = _relative_step(prev_u, prev_v, potentials.log_u, potentials.log_v)
        phi_history.append(
            _phi_tilde_from_state(messages.log_fwd[T - 1], kernels, potentials, marginals)
        )
        if collect_primal_trace:
            messages.log_bwd = backward_pass(kernels, potentials, backend)
            f = primal_objective(messages, kernels, potentials, frame_costs, switch)
            trace.append((sweep, f, phi_history[-1], step))
        if step < cfg.tol:
            converged = True
            break

    # Refresh the backward messages so every reported quantity is an exact
    # marginal of the final tensor (forward messages are already consistent).
    messages.log_bwd = backward_pass(kernels, potentials, backend)
    projections = np.stack(
        [project_single(t, messages, kernels, potentials) for t in range(T)]
    )
    resid = 0.0
    for t in range(T):
        resid = max(
            resid,
            float(np.abs(projections[t].sum(axis=1) - marginals.mu_row).max()),
            float(np.abs(projections[t].sum(axis=0) - marginals.mu_col).max()),
        )
    f_final = primal_objective(messages, kernels, potentials, frame_costs, switch)

    report = SolveReport(
        iterations=sweeps,
        primal_objective=f_final,
        dual_phi_tilde=phi_history[-1],
        dual_const_log=math.log(epsilon) + T * (math.log(m + 1) + math.log(n + 1)),
        marginal_residual_inf=resid,
        step_size=step,
        converged=converged,
        wall_time=time.perf_counter() - t0,
        epsilon=epsilon,
        phi_history=np.array(phi_history),
        trace=trace,
        state=SolverState(frame_costs, switch, marginals, kernels, potentials, messages)
        if keep_state
        else None,
    )
    return report, projections
