"""Cost construction for the trajectory metric.

Builds the per-frame assignment costs (including the dummy row/column for
unassigned tracks), the structured switch-cost table between consecutive
frames, the transport marginals, the regularization scale, and the
log-domain kernels consumed by the iterative solver.

Conventions fixed project-wide: +inf marks structurally forbidden switch
transitions, exp(-inf) = 0, and 0 * inf = 0 in objective sums (enforced by
never multiplying across the forbidden block).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Scenario


def base_cost(x: np.ndarray | None, y: np.ndarray | None, p: float, c: float) -> float:
    """Single-frame cost between two optional states.

    min(||x - y||, c)^p when both are present, 0 when both are absent,
    and c^p / 2 when exactly one is present.  The norm is Euclidean.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if c <= 0:
        raise ValueError(f"c must be > 0, got {c}")
    if x is None and y is None:
        return 0.0
    if x is None or y is None:
        return c**p / 2.0
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"state dimension mismatch: {x.shape} vs {y.shape}")
    dist = float(np.linalg.norm(x - y))
    return min(dist, c) ** p


def switch_cost(i: int, j: int, k: int, l: int, m: int, n: int, gamma: float, p: float) -> float:
    """Cost of moving assignment mass from pair (i, j) to pair (k, l).

    Indices are 1-based; i, k in 1..m+1 and j, l in 1..n+1, where m+1 and
    n+1 are the dummy (unassigned) row and column.  Mass may never change
    row, so the cost is +inf whenever i != k.  Within a row it is 0 for
    staying put, gamma^p for a switch between two real columns, and
    gamma^p / 2 for a switch to or from the dummy column.  Transitions along
    the dummy row are free.
    """
    if not (1 <= i <= m + 1 and 1 <= k <= m + 1):
        raise IndexError(f"row indices must be in 1..{m + 1}, got i={i}, k={k}")
    if not (1 <= j <= n + 1 and 1 <= l <= n + 1):
        raise IndexError(f"column indices must be in 1..{n + 1}, got j={j}, l={l}")
    if i != k:
        return np.inf
    moved = 0.0 if (i, j) == (k, l) else 1.0
    k_real = 0.0 if k == m + 1 else 1.0
    l_real = 0.0 if l == n + 1 else 1.0
    i_real = 0.0 if i == m + 1 else 1.0
    j_real = 0.0 if j == n + 1 else 1.0
    return gamma**p / 2.0 * moved * (k_real * l_real + i_real * j_real)


@dataclass(frozen=True)
class SwitchParams:
    """Structured representation of the inter-frame switch costs.

    The full table over index quadruples ((i,j),(k,l)) is never stored
    densely: it is +inf off the i == k block, zero along the dummy row, and
    depends only on (j, l) for real rows.
    """

    m: int
    n: int
    gamma: float
    p: float

    @property
    def full(self) -> float:
        return self.gamma**self.p

    @property
    def half(self) -> float:
        return self.gamma**self.p / 2.0

    def real_row_table(self) -> np.ndarray:
        """(n+1) x (n+1) cost of a column move within a real row."""
        tbl = np.full((self.n + 1, self.n + 1), self.full)
        tbl[:, -1] = self.half
        tbl[-1, :] = self.half
        np.fill_diagonal(tbl, 0.0)
        return tbl

    def value(self, i: int, j: int, k: int, l: int) -> float:
        return switch_cost(i, j, k, l, self.m, self.n, self.gamma, self.p)

    def max_finite(self) -> float:
        """Largest finite switch cost actually attainable for this (m, n)."""
        if self.m >= 1 and self.n >= 2:
            return self.full
        if self.m >= 1 and self.n >= 1:
            return self.half
        return 0.0

    def dense(self) -> np.ndarray:
        """(m+1, n+1, m+1, n+1) table with +inf off-block; small sizes only."""
        out = np.full((self.m + 1, self.n + 1, self.m + 1, self.n + 1), np.inf)
        out[-1, :, -1, :] = 0.0
        for i in range(self.m):
            out[i, :, i, :] = self.real_row_table()
        return out


@dataclass(frozen=True)
class Marginals:
    """Row and column transport marginals shared by every frame."""

    mu_row: np.ndarray  # length m+1: (1, ..., 1, n)
    mu_col: np.ndarray  # length n+1: (1, ..., 1, m)


def build_marginals(m: int, n: int) -> Marginals:
    if m < 0 or n < 0:
        raise ValueError(f"m and n must be >= 0, got {m}, {n}")
    mu_row = np.ones(m + 1)
    mu_row[-1] = n
    mu_col = np.ones(n + 1)
    mu_col[-1] = m
    return Marginals(mu_row=mu_row, mu_col=mu_col)


def build_frame_costs(scenario: Scenario, p: float, c: float) -> np.ndarray:
    """Per-frame cost matrices, shape (T, m+1, n+1).

    Entry (t, i, j) is base_cost between truth i and estimate j at step t+1;
    row m and column n are the dummy slots (absent state).
    """
    m = scenario.num_truths
    n = scenario.num_estimates
    costs = np.zeros((scenario.T, m + 1, n + 1))
    for t in range(1, scenario.T + 1):
        xs = [traj.state_at(t) for traj in scenario.ground_truth] + [None]
        ys = [traj.state_at(t) for traj in scenario.estimates] + [None]
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                costs[t - 1, i, j] = base_cost(x, y, p, c)
    return costs


def epsilon_from_eta(eta: float, T: int, frame_costs: np.ndarray, switch: SwitchParams) -> float:
    """Regularization scale proportional to the largest cost in the problem.

    epsilon = eta * T * max(largest frame cost, largest finite switch cost);
    falls back to eta itself when every cost is zero, where any positive
    value yields the correct (zero) objective.
    """
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    top = max(float(frame_costs.max(initial=0.0)), switch.max_finite())
    if top == 0.0:
        return eta
    return eta * T * top


@dataclass(frozen=True)
class Kernels:
    """Log-domain kernels: log_k = -D/epsilon per frame, and the column
    transition log-kernel for real rows (-F/epsilon on the i == k block).

    The transition kernel takes only three values: 0 for staying put,
    log_trans_full for a real-to-real column switch, and log_trans_half for
    a switch to or from the dummy column; the full matrix is kept for
    pairwise projections.  The dummy row's transitions are free (log-kernel
    zero), and the block that would change rows is -inf and never
    materialized.
    """

    log_k: np.ndarray  # (T, m+1, n+1)
    log_transition_real: np.ndarray  # (n+1, n+1)
    log_trans_full: float
    log_trans_half: float
    epsilon: float

    @property
    def T(self) -> int:
        return self.log_k.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.log_k.shape[1], self.log_k.shape[2]

    def dense_log_pair_kernel(self) -> np.ndarray:
        """(m+1, n+1, m+1, n+1) log-kernel with -inf off-block; tests only."""
        m1, n1 = self.shape
        out = np.full((m1, n1, m1, n1), -np.inf)
        out[-1, :, -1, :] = 0.0
        for i in range(m1 - 1):
            out[i, :, i, :] = self.log_transition_real
        return out


def build_kernels(frame_costs: np.ndarray, switch: SwitchParams, epsilon: float) -> Kernels:
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    return Kernels(
        log_k=-frame_costs / epsilon,
        log_transition_real=-switch.real_row_table() / epsilon,
        log_trans_full=-switch.full / epsilon,
        log_trans_half=-switch.half / epsilon,
        epsilon=epsilon,
    )
