"""Steady states by constrained quadratic minimization.

A circuit dissipates power ``P(phi) = 1/2 sum_e c_e (phi_s - phi_t)^2``; the
physical potential for given boundary data is the minimizer of P with the
terminal potentials held fixed, and the resulting boundary currents are the
Schur complement (Dirichlet-to-Neumann) map applied to the boundary
potentials.

A detailed balanced Markov network plays the same game one change of
variables away: with deviations x = p/q the dissipation
``C(p) = 1/4 sum_e r_e q_s (p_s/q_s - p_t/q_t)^2`` is the power functional of
the circuit with conductances ``c_e = r_e q_s / 2``, steady states of the
open master equation are exactly the constrained minimizers of C, and the
boundary flow is the net population outflow -(G p) restricted to the
terminals.

Everything here is dense linear algebra; interior solves use the
minimum-norm least-squares solution so that internal components untouched by
any terminal (which make the interior block singular) are still handled,
with a warning naming them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import generator_matrix
from .linrel import RANK_TOL, Subspace
from .network import (CIRCUIT, DETAILED_BALANCED, Edge, Network, NetworkError,
                      OpenNetwork)


@dataclass(frozen=True, eq=False)
class QuadraticFunctional:
    """A weighted graph Laplacian L; the functional value is v^T L v / 2."""

    node_order: tuple[str, ...]
    matrix: np.ndarray

    def value(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return 0.5 * float(v @ self.matrix @ v)

    def values(self, rows: np.ndarray) -> np.ndarray:
        """Functional evaluated on each row of a matrix of vectors."""
        rows = np.asarray(rows, dtype=float)
        return 0.5 * np.einsum("ki,ij,kj->k", rows, self.matrix, rows)


@dataclass(frozen=True, eq=False)
class BoundaryGraphSubspace:
    """Boundary data compatible with some steady state.

    A subspace of (potentials/populations, currents/flows) over the terminal
    set, of dimension equal to the number of terminals: the graph of the
    linear map from boundary potentials (populations) to boundary currents
    (flows).
    """

    terminal_order: tuple[str, ...]
    space: Subspace


def _require_kind(net, kind: str, op: str) -> Network:
    network = net.network if isinstance(net, OpenNetwork) else net
    if network.kind != kind:
        raise NetworkError(f"{op} requires kind {kind!r}, got {network.kind!r}")
    return network


def extended_power(circuit, phi) -> float:
    """Half the total power dissipated at the node potentials ``phi``."""
    net = _require_kind(circuit, CIRCUIT, "extended_power")
    index = {n: k for k, n in enumerate(net.nodes)}
    phi = np.asarray(phi, dtype=float)
    total = 0.0
    for e in net.edges:
        d = phi[index[e.source]] - phi[index[e.target]]
        total += e.weight * d * d
    return 0.5 * total


def extended_dissipation(markov, p) -> float:
    """Dissipation of a detailed balanced network at populations ``p``."""
    net = _require_kind(markov, DETAILED_BALANCED, "extended_dissipation")
    index = {n: k for k, n in enumerate(net.nodes)}
    p = np.asarray(p, dtype=float)
    total = 0.0
    for e in net.edges:
        qs = net.population(e.source)
        d = p[index[e.source]] / qs - p[index[e.target]] / net.population(e.target)
        total += e.weight * qs * d * d
    return 0.25 * total


def equivalent_conductance(edge: Edge, populations) -> float:
    """Conductance of the circuit edge standing in for a Markov edge.

    Half the rate times the equilibrium population at the source; the half
    compensates for Markov edges carrying flow in one direction only.
    """
    return 0.5 * edge.weight * populations[edge.source]


def _laplacian_from_weights(nodes, weighted_edges) -> np.ndarray:
    index = {n: k for k, n in enumerate(nodes)}
    n = len(nodes)
    lap = np.zeros((n, n))
    for s, t, c in weighted_edges:
        i, j = index[s], index[t]
        if i == j:
            continue
        lap[i, j] -= c
        lap[j, i] -= c
        lap[i, i] += c
        lap[j, j] += c
    return lap


def laplacian(circuit) -> QuadraticFunctional:
    """Weighted graph Laplacian of a circuit: P(phi) = phi^T L phi / 2.

    Parallel conductances add; self-loops contribute nothing.
    """
    net = _require_kind(circuit, CIRCUIT, "laplacian")
    lap = _laplacian_from_weights(
        net.nodes, ((e.source, e.target, e.weight) for e in net.edges))
    return QuadraticFunctional(net.nodes, lap)


def dissipation_laplacian(markov) -> QuadraticFunctional:
    """Laplacian L with C(p) = x^T L x / 2 in deviation coordinates x = p/q.

    This is exactly the Laplacian of the equivalent circuit (conductance
    ``r_e q_source / 2`` per edge).
    """
    net = _require_kind(markov, DETAILED_BALANCED, "dissipation_laplacian")
    lap = _laplacian_from_weights(
        net.nodes,
        ((e.source, e.target, equivalent_conductance(e, net.populations))
         for e in net.edges))
    return QuadraticFunctional(net.nodes, lap)


def _terminal_split(net: OpenNetwork) -> tuple[np.ndarray, np.ndarray]:
    index = {n: k for k, n in enumerate(net.network.nodes)}
    term = np.asarray([index[n] for n in net.terminals], dtype=int)
    internal = np.asarray([index[n] for n in net.internal_nodes], dtype=int)
    return term, internal


def _warn_isolated_internals(net: OpenNetwork) -> None:
    """Warn when internal connected components touch no terminal."""
    if not net.internal_nodes:
        return
    parent = {n: n for n in net.network.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in net.network.edges:
        ra, rb = find(e.source), find(e.target)
        if ra != rb:
            parent[ra] = rb
    terminal_roots = {find(n) for n in net.terminals}
    isolated = sorted(
        n for n in net.internal_nodes if find(n) not in terminal_roots)
    if isolated:
        warnings.warn(
            "internal nodes disconnected from every terminal "
            f"(minimum-norm solution used): {isolated}",
            stacklevel=3)


def _interior_minimize(lap: np.ndarray, term: np.ndarray,
                       internal: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Extend boundary values to the interior stationary point.

    Solves L_II v_I = -L_IT psi by minimum-norm least squares; when L_II is
    singular this picks the minimum-norm representative of the solution set,
    which does not affect the attained value or the boundary map.
    """
    full = np.zeros(lap.shape[0])
    full[term] = psi
    if internal.size:
        rhs = -lap[np.ix_(internal, term)] @ psi
        sol, *_ = np.linalg.lstsq(lap[np.ix_(internal, internal)], rhs,
                                  rcond=None)
        full[internal] = sol
    return full


def minimize_power(circuit: OpenNetwork, psi) -> np.ndarray:
    """Potentials minimizing extended power with terminals held at ``psi``.

    ``psi`` is ordered like ``circuit.terminals``; the result covers every
    node in network order and attains the power functional value Q(psi).
    """
    net = _require_kind(circuit, CIRCUIT, "minimize_power")
    psi = np.asarray(psi, dtype=float)
    term, internal = _terminal_split(circuit)
    if psi.shape != (term.size,):
        raise NetworkError(
            f"expected one boundary value per terminal ({term.size})")
    _warn_isolated_internals(circuit)
    return _interior_minimize(laplacian(net).matrix, term, internal, psi)


def minimize_dissipation(markov: OpenNetwork, b) -> np.ndarray:
    """Populations minimizing dissipation with terminals held at ``b``.

    Computed in deviation coordinates: rescale the boundary populations by
    1/q, minimize the equivalent circuit's power, scale back.  The result is
    the steady state of the open master equation with boundary ``b``.
    """
    net = _require_kind(markov, DETAILED_BALANCED, "minimize_dissipation")
    b = np.asarray(b, dtype=float)
    term, internal = _terminal_split(markov)
    if b.shape != (term.size,):
        raise NetworkError(
            f"expected one boundary value per terminal ({term.size})")
    _warn_isolated_internals(markov)
    q = np.array([net.population(n) for n in net.nodes])
    psi = b / q[term]
    x = _interior_minimize(dissipation_laplacian(net).matrix, term, internal,
                           psi)
    return q * x


def dtn_matrix(circuit: OpenNetwork) -> np.ndarray:
    """Dirichlet-to-Neumann map: boundary potentials to boundary currents.

    The Schur complement ``L_TT - L_TI pinv(L_II) L_IT`` of the circuit
    Laplacian onto the terminals, in terminal order.
    """
    net = _require_kind(circuit, CIRCUIT, "dtn_matrix")
    term, internal = _terminal_split(circuit)
    _warn_isolated_internals(circuit)
    lap = laplacian(net).matrix
    schur = lap[np.ix_(term, term)].copy()
    if internal.size:
        cross = lap[np.ix_(internal, term)]
        x, *_ = np.linalg.lstsq(lap[np.ix_(internal, internal)], cross,
                                rcond=None)
        schur -= cross.T @ x
    return schur


def boundary_current(circuit: OpenNetwork, psi) -> np.ndarray:
    """Net current outflow at each terminal for boundary potentials ``psi``."""
    psi = np.asarray(psi, dtype=float)
    return dtn_matrix(circuit) @ psi


def boundary_flow(markov: OpenNetwork, b) -> np.ndarray:
    """Net population outflow at each terminal in the steady state for ``b``.

    Evaluates -(G p) on the terminals at the dissipation minimizer p, i.e.
    rate-weighted outflow minus inflow, straight from the generator matrix.
    """
    net = _require_kind(markov, DETAILED_BALANCED, "boundary_flow")
    p = minimize_dissipation(markov, b)
    term, _ = _terminal_split(markov)
    return -(generator_matrix(net).matrix @ p)[term]


def graph_of_boundary_map(net: OpenNetwork,
                          rank_tol: float = RANK_TOL) -> BoundaryGraphSubspace:
    """The realizable (boundary data, boundary response) pairs as a subspace.

    For circuits: pairs (psi, DtN psi).  For detailed balanced Markov
    networks: pairs (b, flow(b)), with the flow map assembled column by
    column from :func:`boundary_flow`.  The subspace lives in
    (values block, response block) coordinates over the terminals and always
    has dimension equal to the terminal count.
    """
    network = net.network
    nt = len(net.terminals)
    if network.kind == CIRCUIT:
        response = dtn_matrix(net)
    elif network.kind == DETAILED_BALANCED:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cols = [boundary_flow(net, e) for e in np.eye(nt)]
        _warn_isolated_internals(net)
        response = np.array(cols).T if nt else np.zeros((0, 0))
    else:
        raise NetworkError(
            f"no boundary map for plain kind {network.kind!r}")
    stacked = np.vstack([np.eye(nt), response])
    space = Subspace.from_columns(stacked, ambient_dim=2 * nt,
                                  rank_tol=rank_tol)
    if space.dim != nt:
        raise AssertionError("boundary graph lost rank")
    return BoundaryGraphSubspace(net.terminals, space)
