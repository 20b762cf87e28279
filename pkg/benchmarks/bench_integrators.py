#!/usr/bin/env python3
"""Compare the compiled integrator kernel against the pure numpy fallback.

Runs the clamped fixed-step integrator on detailed balanced chains of
increasing size through both backends, checks they agree, and prints a
timing table.  Usage: python benchmarks/bench_integrators.py
"""

import time

import numpy as np

from steadybox import _kernels_py
from steadybox.dynamics import generator_matrix
from steadybox.testing import random_detailed_balanced_network

try:
    from steadybox import _kernels
except ImportError:
    _kernels = None

CASES = [(5, 20000), (20, 10000), (100, 2000), (400, 500)]
REPEATS = 3


def prepare(n_nodes, n_steps, rng):
    net = random_detailed_balanced_network(rng, n_nodes=n_nodes,
                                           extra_pairs=n_nodes)
    gen = generator_matrix(net)
    dt = 0.5 / gen.inf_norm
    n_term = max(1, n_nodes // 10)
    terminal_idx = np.arange(n_term, dtype=np.intp)
    internal_idx = np.arange(n_term, n_nodes, dtype=np.intp)
    term_vals = np.ascontiguousarray(
        rng.uniform(0.5, 2.0, (n_steps, 3, n_term)))
    p0 = rng.uniform(0.5, 2.0, n_nodes)
    dts = np.full(n_steps, dt)
    return (np.ascontiguousarray(gen.matrix), p0, internal_idx, terminal_idx,
            term_vals, dts)


def best_time(kernel, args):
    best = np.inf
    result = None
    for _ in range(REPEATS):
        start = time.perf_counter()
        result = kernel.rk4_clamped(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    rng = np.random.default_rng(0)
    if _kernels is None:
        print("compiled kernel not built; timing the numpy fallback only")
    header = f"{'nodes':>6} {'steps':>7} {'numpy [ms]':>11}"
    if _kernels is not None:
        header += f" {'compiled [ms]':>14} {'speedup':>8} {'max |diff|':>11}"
    print(header)
    for n_nodes, n_steps in CASES:
        args = prepare(n_nodes, n_steps, rng)
        t_py, states_py = best_time(_kernels_py, args)
        row = f"{n_nodes:>6} {n_steps:>7} {1e3 * t_py:>11.2f}"
        if _kernels is not None:
            t_c, states_c = best_time(_kernels, args)
            diff = float(np.max(np.abs(states_c - states_py)))
            row += f" {1e3 * t_c:>14.2f} {t_py / t_c:>8.1f} {diff:>11.2e}"
        print(row)


if __name__ == "__main__":
    main()
