"""Numba-compiled hot kernels: message transitions and potential updates.

The column-transition kernel takes only three values (stay = 1, real-to-real
switch, switch to/from the dummy column), so each output entry of a message
step needs one row sum rather than a full inner loop.  The subtraction
max(S - E_j, 0) is safe: whenever it cancels, the stay term dominates the
output, bounding the relative error at machine precision.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def step_transition(log_msg, log_k_t, log_u_t, log_v_t, log_full, log_half):
    """One message step: out[i, j] = logsumexp over j' of
    (log_msg + log_k_t + log_u_t + log_v_t)[i, j'] + log_transition[j', j].

    Real rows use the three-valued transition; the last (dummy) row moves
    freely, so its output is the plain row logsumexp broadcast.
    """
    m1, n1 = log_k_t.shape
    n = n1 - 1
    a = np.exp(log_full)
    b = np.exp(log_half)
    out = np.empty((m1, n1))
    buf = np.empty(n1)
    for i in range(m1 - 1):
        mx = -np.inf
        for j in range(n1):
            val = log_msg[i, j] + log_k_t[i, j] + log_u_t[i] + log_v_t[j]
            buf[j] = val
            if val > mx:
                mx = val
        if mx == -np.inf:
            for j in range(n1):
                out[i, j] = -np.inf
            continue
        s_real = 0.0
        for j in range(n1):
            buf[j] = np.exp(buf[j] - mx)
            if j < n:
                s_real += buf[j]
        e_dummy = buf[n]
        for j in range(n):
            rest = s_real - buf[j]
            if rest < 0.0:
                rest = 0.0
            out[i, j] = mx + np.log(buf[j] + b * e_dummy + a * rest)
        out[i, n] = mx + np.log(e_dummy + b * s_real)
    # Dummy row: free transitions.
    i = m1 - 1
    mx = -np.inf
    for j in range(n1):
        val = log_msg[i, j] + log_k_t[i, j] + log_u_t[i] + log_v_t[j]
        buf[j] = val
        if val > mx:
            mx = val
    if mx == -np.inf:
        for j in range(n1):
            out[i, j] = -np.inf
    else:
        s = 0.0
        for j in range(n1):
            s += np.exp(buf[j] - mx)
        val = mx + np.log(s)
        for j in range(n1):
            out[i, j] = val
    return out


@njit(cache=True)
def frame_update(log_fwd_t, log_k_t, log_bwd_t, log_u_t, log_v_t, log_mu_row, log_mu_col):
    """Exact dual block updates at one step: rows first, then columns using
    the fresh row potentials.  Returns the new potential vectors; a
    non-finite entry signals a vanished projected marginal."""
    m1, n1 = log_k_t.shape
    new_u = np.empty(m1)
    new_v = np.empty(n1)
    for i in range(m1):
        mx = -np.inf
        for j in range(n1):
            val = log_fwd_t[i, j] + log_k_t[i, j] + log_bwd_t[i, j] + log_v_t[j]
            if val > mx:
                mx = val
        if mx == -np.inf:
            new_u[i] = np.inf
            continue
        s = 0.0
        for j in range(n1):
            s += np.exp(
                log_fwd_t[i, j] + log_k_t[i, j] + log_bwd_t[i, j] + log_v_t[j] - mx
            )
        new_u[i] = log_mu_row[i] - (mx + np.log(s))
    for j in range(n1):
        mx = -np.inf
        for i in range(m1):
            val = log_fwd_t[i, j] + log_k_t[i, j] + log_bwd_t[i, j] + new_u[i]
            if val > mx:
                mx = val
        if mx == -np.inf or mx == np.inf:
            new_v[j] = np.inf
            continue
        s = 0.0
        for i in range(m1):
            s += np.exp(
                log_fwd_t[i, j] + log_k_t[i, j] + log_bwd_t[i, j] + new_u[i] - mx
            )
        new_v[j] = log_mu_col[j] - (mx + np.log(s))
    return new_u, new_v
