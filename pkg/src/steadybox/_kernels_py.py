"""Pure-Python fallback for the integrator hot loop.

Same contract as the compiled extension ``steadybox._kernels``; selected at
import time in :mod:`steadybox.dynamics` when the extension is unavailable.
"""

import numpy as np

BACKEND = "python"


def rk4_clamped(h, p0, internal_idx, terminal_idx, terminal_values, dts):
    """Fixed-step classic Runge-Kutta on the master equation.

    Internal coordinates follow dp/dt = H p; terminal coordinates are
    clamped to prescribed values at every stage.  ``terminal_values`` has
    shape (n_steps, 3, n_terminals): the boundary data at the three stage
    times t, t + dt/2, t + dt of each step.  Returns the (n_steps + 1, n)
    array of states at the step boundaries.
    """
    h = np.ascontiguousarray(h, dtype=float)
    n = h.shape[0]
    ns = dts.shape[0]
    states = np.empty((ns + 1, n))
    states[0] = p0
    cur = np.array(p0, dtype=float)
    stage = cur.copy()
    h_int = h[internal_idx, :]
    for s in range(ns):
        step = dts[s]
        tv = terminal_values[s]
        stage[:] = cur
        stage[terminal_idx] = tv[0]
        k1 = h_int @ stage
        stage[internal_idx] = cur[internal_idx] + 0.5 * step * k1
        stage[terminal_idx] = tv[1]
        k2 = h_int @ stage
        stage[internal_idx] = cur[internal_idx] + 0.5 * step * k2
        k3 = h_int @ stage
        stage[internal_idx] = cur[internal_idx] + step * k3
        stage[terminal_idx] = tv[2]
        k4 = h_int @ stage
        cur[internal_idx] += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        cur[terminal_idx] = tv[2]
        states[s + 1] = cur
    return states
