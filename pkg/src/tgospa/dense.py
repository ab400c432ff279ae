"""Naive reference computations on fully materialized transport tensors.

Everything here enumerates all (m+1)^T * (n+1)^T index tuples explicitly and
is only usable at toy sizes.  These routines exist to cross-check the
message-passing solver and the assignment-polytope LP against a second,
independent formulation; they are deliberately written in the most direct
way possible.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

from .costs import Kernels, Marginals, SwitchParams


def cost_tensor(frame_costs: np.ndarray, switch: SwitchParams) -> np.ndarray:
    """Full cost tensor with 2T axes ordered (i_1, j_1, ..., i_T, j_T).

    Entries crossing rows between consecutive steps are +inf.
    """
    T, m1, n1 = frame_costs.shape
    shape = (m1, n1) * T
    C = np.zeros(shape)
    for t in range(T):
        dims = [1] * (2 * T)
        dims[2 * t] = m1
        dims[2 * t + 1] = n1
        C = C + frame_costs[t].reshape(dims)
    F = switch.dense()
    for t in range(T - 1):
        dims = [1] * (2 * T)
        dims[2 * t] = m1
        dims[2 * t + 1] = n1
        dims[2 * t + 2] = m1
        dims[2 * t + 3] = n1
        C = C + F.reshape(dims)
    return C


def plan_tensor(kernels: Kernels, log_u: np.ndarray, log_v: np.ndarray) -> np.ndarray:
    """Materialize the scaled kernel tensor for given log potentials.

    log_u has shape (T, m+1) and log_v has shape (T, n+1).  The result is
    exp(log kernel + sum of potentials), zero wherever a transition is
    forbidden.
    """
    T = kernels.T
    m1, n1 = kernels.shape
    shape = (m1, n1) * T
    logM = np.zeros(shape)
    for t in range(T):
        dims = [1] * (2 * T)
        dims[2 * t] = m1
        dims[2 * t + 1] = n1
        frame = kernels.log_k[t] + log_u[t][:, None] + log_v[t][None, :]
        logM = logM + frame.reshape(dims)
    logF = kernels.dense_log_pair_kernel()
    for t in range(T - 1):
        dims = [1] * (2 * T)
        dims[2 * t] = m1
        dims[2 * t + 1] = n1
        dims[2 * t + 2] = m1
        dims[2 * t + 3] = n1
        logM = logM + logF.reshape(dims)
    return np.exp(logM)


def project_single(M: np.ndarray, t: int) -> np.ndarray:
    """Marginal of the tensor on the (i_t, j_t) axes."""
    T = M.ndim // 2
    axes = tuple(a for a in range(2 * T) if a not in (2 * t, 2 * t + 1))
    return M.sum(axis=axes)


def project_pair(M: np.ndarray, t: int) -> np.ndarray:
    """Marginal on the (i_t, j_t, i_{t+1}, j_{t+1}) axes."""
    T = M.ndim // 2
    keep = (2 * t, 2 * t + 1, 2 * t + 2, 2 * t + 3)
    axes = tuple(a for a in range(2 * T) if a not in keep)
    return M.sum(axis=axes)


def inner(C: np.ndarray, M: np.ndarray) -> float:
    """<C, M> with the 0 * inf = 0 convention."""
    mask = M > 0
    return float((C[mask] * M[mask]).sum())


def entropy(M: np.ndarray) -> float:
    """Sum over all entries of M log M - M + 1, with 0 log 0 = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        body = np.where(M > 0, M * np.log(M) - M, 0.0)
    return float(body.sum()) + M.size


def solve_mot_lp(
    frame_costs: np.ndarray, switch: SwitchParams, marginals: Marginals
) -> tuple[float, np.ndarray]:
    """Exact LP over the materialized transport tensor.

    Only index tuples with a constant row are kept (every other tuple has
    infinite cost).  Returns the optimal value and the optimal mass per
    (row, column path) variable, shaped (m+1, (n+1)^T flattened paths).
    """
    T, m1, n1 = frame_costs.shape
    paths = list(itertools.product(range(n1), repeat=T))
    real_tbl = switch.real_row_table()

    nvar = m1 * len(paths)
    cost = np.empty(nvar)
    for i in range(m1):
        for k, js in enumerate(paths):
            val = sum(frame_costs[t, i, js[t]] for t in range(T))
            if i < m1 - 1:
                val += sum(real_tbl[js[t], js[t + 1]] for t in range(T - 1))
            cost[i * len(paths) + k] = val

    # Row marginals per step (identical rows for every t, kept for fidelity)
    # and column marginals per step.
    rows = []
    rhs = []
    for t in range(T):
        for i in range(m1):
            row = np.zeros(nvar)
            row[i * len(paths) : (i + 1) * len(paths)] = 1.0
            rows.append(row)
            rhs.append(marginals.mu_row[i])
        for j in range(n1):
            row = np.zeros(nvar)
            for i in range(m1):
                for k, js in enumerate(paths):
                    if js[t] == j:
                        row[i * len(paths) + k] = 1.0
            rows.append(row)
            rhs.append(marginals.mu_col[j])

    res = linprog(cost, A_eq=np.array(rows), b_eq=np.array(rhs), bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"dense transport LP failed: {res.message}")
    return float(res.fun), res.x.reshape(m1, len(paths))
