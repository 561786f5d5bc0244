"""Compiled forward-Euler stepper.

Arithmetic is written in the same order as the numpy operators in
:mod:`chemotaxis_fd.dynamics` so both paths agree bit for bit.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def advance(u, v, n_steps, dt, dx, eps, r, clamp_u):
    """Take ``n_steps`` Euler steps in place.

    Returns -1 when every step stays finite, otherwise the number of steps
    completed before a non-finite value appeared.
    """
    m = u.shape[0]
    uv = np.empty(m)
    vv = np.empty(m)
    du = np.empty(m)
    dv = np.empty(m)
    dx2 = dx * dx
    two_dx = 2.0 * dx
    for step in range(n_steps):
        for k in range(m):
            uv[k] = u[k] * v[k]
            vv[k] = v[k] * v[k]
        for k in range(1, m - 1):
            d2u = (u[k + 1] - 2.0 * u[k] + u[k - 1]) / dx2
            d1uv = (uv[k + 1] - uv[k - 1]) / two_dx
            du[k] = d2u - d1uv + r * u[k] * (1.0 - u[k])
            d2v = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / dx2
            d1u = (u[k + 1] - u[k - 1]) / two_dx
            d1vv = (vv[k + 1] - vv[k - 1]) / two_dx
            dv[k] = eps * d2v - d1u + eps * d1vv
        ok = True
        for k in range(1, m - 1):
            un = u[k] + dt * du[k]
            if clamp_u and un < 0.0:
                un = 0.0
            u[k] = un
            v[k] = v[k] + dt * dv[k]
            if not (np.isfinite(un) and np.isfinite(v[k])):
                ok = False
        u[0] = u[2]
        u[m - 1] = u[m - 3]
        v[1] = 0.0
        v[m - 2] = 0.0
        v[0] = -v[2]
        v[m - 1] = -v[m - 3]
        if not ok:
            return step
    return -1
