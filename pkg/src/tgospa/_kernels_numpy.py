"""Pure-numpy fallback for the hot kernels; same math as the numba path."""

from __future__ import annotations

import numpy as np


def step_transition(log_msg, log_k_t, log_u_t, log_v_t, log_full, log_half):
    """One message step; see the numba twin for the reduction structure."""
    B = log_msg + log_k_t + log_u_t[:, None] + log_v_t[None, :]
    m1, n1 = B.shape
    n = n1 - 1
    a = np.exp(log_full)
    b = np.exp(log_half)
    out = np.empty_like(B)

    real = B[:-1]
    c = real.max(axis=1) if n1 else np.zeros(0)
    safe_c = np.where(np.isfinite(c), c, 0.0)
    with np.errstate(divide="ignore"):
        E = np.exp(real - safe_c[:, None])
        s_real = E[:, :n].sum(axis=1)
        rest = np.maximum(s_real[:, None] - E[:, :n], 0.0)
        out[:-1, :n] = safe_c[:, None] + np.log(E[:, :n] + b * E[:, n:] + a * rest)
        out[:-1, n] = safe_c + np.log(E[:, n] + b * s_real)
        out[:-1][~np.isfinite(c)] = -np.inf

        cd = B[-1].max()
        if np.isfinite(cd):
            out[-1] = cd + np.log(np.exp(B[-1] - cd).sum())
        else:
            out[-1] = -np.inf
    return out


def frame_update(log_fwd_t, log_k_t, log_bwd_t, log_u_t, log_v_t, log_mu_row, log_mu_col):
    """Dual block updates at one step (rows, then columns); see numba twin."""
    base = log_fwd_t + log_k_t + log_bwd_t
    new_u = log_mu_row - _logsumexp_axis(base + log_v_t[None, :], axis=1)
    new_v = log_mu_col - _logsumexp_axis(base + new_u[:, None], axis=0)
    return new_u, new_v


def _logsumexp_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    mx = arr.max(axis=axis)
    safe = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = safe + np.log(np.exp(arr - np.expand_dims(safe, axis)).sum(axis=axis))
    return np.where(np.isfinite(mx), out, mx)
