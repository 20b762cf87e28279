"""Master-equation dynamics: generator matrices and time integration.

The generator (infinitesimal stochastic) matrix G of a Markov network drives
the master equation dp/dt = G p.  Closed networks are integrated as-is; open
networks clamp the terminal coordinates to prescribed boundary signals while
the internal coordinates evolve.  Integration is fixed-step classic
Runge-Kutta: the networks this package targets are small and reproducibility
matters more than adaptivity.

The step loop is the package's hot kernel.  A compiled extension is used
when available, with a pure numpy fallback selected at import time; both
implement the same contract and are compared in the test suite and in
``benchmarks/bench_integrators.py``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .network import (DETAILED_BALANCED, Network, NetworkError, OpenNetwork)

from . import _kernels_py

try:
    from . import _kernels as _kernels_impl
except ImportError:  # pragma: no cover - depends on the build
    _kernels_impl = _kernels_py

#: Which integrator implementation was selected at import time.
KERNEL_BACKEND: str = _kernels_impl.BACKEND

# Above this node count BLAS matvecs beat the compiled scalar loop (see
# benchmarks/bench_integrators.py), so large systems take the numpy path.
_COMPILED_MAX_NODES = 64

DEFAULT_DT = 1e-3


class DynamicsError(ValueError):
    """Bad boundary data or initial conditions for an integration."""


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """The generator of the master equation for a fixed node order.

    Off-diagonal entry (i, j) is the total rate from node j to node i;
    diagonal entries make every column sum to zero.
    """

    node_order: tuple[str, ...]
    matrix: np.ndarray

    @property
    def inf_norm(self) -> float:
        return float(np.max(np.sum(np.abs(self.matrix), axis=1), initial=0.0))


def generator_matrix(net: Network) -> GeneratorMatrix:
    """Build the generator from the edge rates.

    Parallel edges add; self-loops contribute nothing (an edge from a node
    to itself moves no population).
    """
    index = {n: k for k, n in enumerate(net.nodes)}
    n = len(net.nodes)
    g = np.zeros((n, n))
    for e in net.edges:
        if e.source == e.target:
            continue
        g[index[e.target], index[e.source]] += e.weight
    # exact column sums: the diagonal negates the accumulated column
    np.fill_diagonal(g, 0.0)
    np.fill_diagonal(g, -np.sum(g, axis=0))
    return GeneratorMatrix(net.nodes, g)


def is_infinitesimal_stochastic(a, tol: float = 1e-9) -> bool:
    """Non-negative off-diagonals and zero column sums, within ``tol``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    off = a - np.diag(np.diag(a))
    if np.min(off, initial=0.0) < -tol:
        return False
    return bool(np.max(np.abs(np.sum(a, axis=0)), initial=0.0) <= tol)


def check_detailed_balance(net: Network, tol: float = 1e-9) -> bool:
    """Whether every pairwise flow balances at the chosen populations.

    Compares max |G_ij q_j - G_ji q_i| against ``tol`` times the largest
    flow entry (or 1 if all flows vanish).
    """
    q = _population_vector(net)
    g = generator_matrix(net).matrix
    flows = g * q[np.newaxis, :]
    np.fill_diagonal(flows, 0.0)
    residual = float(np.max(np.abs(flows - flows.T), initial=0.0))
    scale = float(np.max(np.abs(flows), initial=0.0)) or 1.0
    return residual <= tol * scale


def check_equilibrium(net: Network, tol: float = 1e-9) -> bool:
    """Whether the populations are a steady state: ``G q = 0`` up to scale."""
    q = _population_vector(net)
    gen = generator_matrix(net)
    residual = float(np.max(np.abs(gen.matrix @ q), initial=0.0))
    scale = gen.inf_norm * float(np.max(np.abs(q), initial=0.0))
    return residual <= tol * scale


def _population_vector(net: Network) -> np.ndarray:
    if net.kind != DETAILED_BALANCED:
        raise NetworkError(
            f"populations required: network kind is {net.kind!r}")
    return np.array([net.population(n) for n in net.nodes])


class BoundarySignal:
    """Boundary data at one terminal as a function of time.

    Either a constant, or a sampled time series interpolated linearly and
    defined only on its sample interval.
    """

    __slots__ = ("_value", "_times", "_values")

    def __init__(self, value=None, times=None, values=None):
        self._value = value
        self._times = times
        self._values = values

    @classmethod
    def constant(cls, value: float) -> "BoundarySignal":
        value = float(value)
        if not math.isfinite(value):
            raise DynamicsError(f"boundary value must be finite, got {value!r}")
        return cls(value=value)

    @classmethod
    def sampled(cls, times, values) -> "BoundarySignal":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise DynamicsError("need matching 1-d sample arrays, length >= 2")
        if not np.all(np.diff(times) > 0):
            raise DynamicsError("sample times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise DynamicsError("boundary samples must be finite")
        return cls(times=times, values=values)

    def domain(self) -> tuple[float, float] | None:
        """Sample interval, or None for a constant (defined everywhere)."""
        if self._times is None:
            return None
        return float(self._times[0]), float(self._times[-1])

    def at(self, t):
        """Evaluate at a scalar time or an array of times."""
        t = np.asarray(t, dtype=float)
        if self._times is None:
            out = np.full(t.shape, self._value)
            return float(out) if out.ndim == 0 else out
        lo, hi = self._times[0], self._times[-1]
        slack = 1e-9 * max(1.0, abs(hi))
        if np.min(t) < lo - slack or np.max(t) > hi + slack:
            raise DynamicsError(
                f"boundary signal undefined outside [{lo}, {hi}]")
        out = np.interp(np.clip(t, lo, hi), self._times, self._values)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution of a master equation.

    ``states[k]`` is the population vector over ``node_order`` at
    ``times[k]``.  Populations that dip below -1e-9 attach a warning rather
    than being clamped: the exact flow preserves non-negativity, so a dip
    signals integrator error worth seeing.
    """

    node_order: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    warnings: tuple[str, ...] = ()

    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def column(self, node: str) -> np.ndarray:
        return self.states[:, self.node_order.index(node)]

    def to_csv(self) -> str:
        import csv
        import io as _io

        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", *self.node_order])
        for t, row in zip(self.times, self.states):
            writer.writerow([repr(float(t))] + [repr(float(x)) for x in row])
        return buf.getvalue()


def _step_sizes(t_end: float, dt: float) -> np.ndarray:
    """Full steps of length dt, with a shortened final step to land on t_end."""
    if not (math.isfinite(dt) and dt > 0):
        raise DynamicsError(f"dt must be finite and positive, got {dt!r}")
    if not (math.isfinite(t_end) and t_end >= 0):
        raise DynamicsError(f"t_end must be finite and >= 0, got {t_end!r}")
    n_full = int(math.floor(t_end / dt))
    remainder = t_end - n_full * dt
    if remainder <= 1e-12 * max(dt, t_end):
        remainder = 0.0
    dts = [dt] * n_full
    if remainder > 0.0:
        dts.append(remainder)
    return np.asarray(dts, dtype=float)


def _sample_times(dts: np.ndarray, t_end: float) -> np.ndarray:
    times = np.concatenate([[0.0], np.cumsum(dts)])
    if times.size > 1:
        times[-1] = t_end
    return times


def _run_kernel(g: np.ndarray, p0: np.ndarray, internal_idx, terminal_idx,
                terminal_values: np.ndarray, dts: np.ndarray) -> np.ndarray:
    kernel = _kernels_impl if g.shape[0] <= _COMPILED_MAX_NODES \
        else _kernels_py
    return kernel.rk4_clamped(
        np.ascontiguousarray(g, dtype=float),
        np.ascontiguousarray(p0, dtype=float),
        np.ascontiguousarray(internal_idx, dtype=np.intp),
        np.ascontiguousarray(terminal_idx, dtype=np.intp),
        np.ascontiguousarray(terminal_values, dtype=float),
        np.ascontiguousarray(dts, dtype=float))


def _trajectory_warnings(states: np.ndarray,
                         node_order: tuple[str, ...]) -> tuple[str, ...]:
    low = np.min(states, axis=0, initial=0.0)
    bad = [(node_order[k], low[k]) for k in np.flatnonzero(low < -1e-9)]
    if not bad:
        return ()
    listing = ", ".join(f"{n} (min {v:.3e})" for n, v in bad)
    return (f"population went below -1e-9 at: {listing}",)


def integrate_closed(net: Network, p0, t_end: float,
                     dt: float = DEFAULT_DT) -> Trajectory:
    """Integrate dp/dt = G p from p(0) = p0.

    Total population is conserved to integrator accuracy.  ``p0`` may be a
    mapping node -> value or a vector in node order.
    """
    gen = generator_matrix(net)
    p0 = _vector_over(net.nodes, p0, "p0")
    dts = _step_sizes(t_end, dt)
    n = len(net.nodes)
    states = _run_kernel(
        gen.matrix, p0,
        np.arange(n, dtype=np.intp), np.zeros(0, dtype=np.intp),
        np.zeros((dts.size, 3, 0)), dts)
    return Trajectory(net.nodes, _sample_times(dts, t_end), states,
                      _trajectory_warnings(states, net.nodes))


def integrate_open(net: OpenNetwork,
                   boundary: Mapping[str, Union["BoundarySignal", float]],
                   p0_internal, t_end: float,
                   dt: float = DEFAULT_DT) -> Trajectory:
    """Integrate the open master equation with clamped terminals.

    ``boundary`` must give a signal (or constant) for every terminal, and
    ``p0_internal`` a starting value for every internal node.  Terminal
    coordinates in the result equal the boundary signal exactly at the
    sample times; each Runge-Kutta stage sees the signal evaluated at the
    stage time.
    """
    nodes = net.network.nodes
    terminals = net.terminals
    internal = net.internal_nodes
    signals = _signals_for(terminals, boundary)
    p0_int = _vector_over(internal, p0_internal, "p0_internal")

    dts = _step_sizes(t_end, dt)
    times = _sample_times(dts, t_end)
    for sig in signals.values():
        dom = sig.domain()
        if dom is not None and (dom[0] > 0.0 or dom[1] < t_end):
            raise DynamicsError(
                f"boundary signal domain {dom} does not cover [0, {t_end}]")

    index = {n: k for k, n in enumerate(nodes)}
    terminal_idx = np.asarray([index[n] for n in terminals], dtype=np.intp)
    internal_idx = np.asarray([index[n] for n in internal], dtype=np.intp)

    starts = times[:-1]
    stage_times = np.stack(
        [starts, starts + 0.5 * dts, starts + dts], axis=1) \
        if dts.size else np.zeros((0, 3))
    terminal_values = np.empty((dts.size, 3, len(terminals)))
    for k, n in enumerate(terminals):
        terminal_values[:, :, k] = signals[n].at(stage_times) \
            if dts.size else 0.0

    p0 = np.zeros(len(nodes))
    p0[internal_idx] = p0_int
    for k, n in enumerate(terminals):
        p0[terminal_idx[k]] = signals[n].at(0.0)

    gen = generator_matrix(net.network)
    states = _run_kernel(gen.matrix, p0, internal_idx, terminal_idx,
                         terminal_values, dts)
    return Trajectory(nodes, times, states,
                      _trajectory_warnings(states, nodes))


def _signals_for(terminals, boundary) -> dict[str, BoundarySignal]:
    signals = {}
    for n in terminals:
        if n not in boundary:
            raise DynamicsError(f"no boundary signal for terminal {n!r}")
        sig = boundary[n]
        signals[n] = sig if isinstance(sig, BoundarySignal) \
            else BoundarySignal.constant(sig)
    extra = set(boundary) - set(terminals)
    if extra:
        raise DynamicsError(
            f"boundary given for non-terminal nodes: {sorted(extra)}")
    return signals


def _vector_over(names, data, what: str) -> np.ndarray:
    if isinstance(data, Mapping):
        missing = [n for n in names if n not in data]
        if missing:
            raise DynamicsError(f"{what} missing entries for {missing}")
        extra = set(data) - set(names)
        if extra:
            raise DynamicsError(
                f"{what} has entries for unknown nodes {sorted(extra)}")
        vec = np.array([float(data[n]) for n in names])
    else:
        vec = np.asarray(data, dtype=float)
        if vec.shape != (len(names),):
            raise DynamicsError(
                f"{what} must have one entry per node "
                f"({len(names)}), got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise DynamicsError(f"{what} contains non-finite values")
    return vec
