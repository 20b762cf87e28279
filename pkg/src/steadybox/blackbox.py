"""Black boxing: the steady-state relation an open network shows its ports.

Any steady state of an open network pins down a tuple of (potential, current)
or (population, flow) values at the ports; the set of all such tuples is a
linear relation from input data to output data, the network's behavior.
Behaviors compose: the behavior of a glued network is the relational
composite of the behaviors of its parts, so a large network can be analyzed
from its pieces.

For a detailed balanced Markov network the production path goes through the
equivalent circuit: convert rates to conductances (:func:`to_circuit`),
black-box the circuit, then conjugate by the population rescaling that turns
potential-current pairs into population-flow pairs.  The direct construction
from boundary flows (:func:`blackbox_markov_direct`) is kept as an
independent route; :func:`check_triangle` confirms the two agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linrel import (RANK_TOL, LinearRelation, Subspace,
                     apply_relation_to_subspace, compose_relations,
                     is_lagrangian, oplus, permute_coordinates,
                     population_rescaling, port_relation, subspace_distance)
from .network import CIRCUIT, DETAILED_BALANCED, Edge, Network, OpenNetwork
from .variational import (equivalent_conductance, graph_of_boundary_map,
                          _require_kind)


@dataclass(frozen=True, eq=False)
class BoundaryBehavior:
    """The behavior relation plus its port bookkeeping.

    ``relation`` goes from (potentials, currents) over the input ports to
    the same over the output ports; for Markov-derived behaviors the port
    populations are kept for the weighted symplectic checks.
    """

    input_ports: int
    output_ports: int
    relation: LinearRelation
    input_populations: tuple[float, ...] | None = None
    output_populations: tuple[float, ...] | None = None

    def __post_init__(self):
        r = self.relation
        if r.source_dim != 2 * self.input_ports \
                or r.target_dim != 2 * self.output_ports:
            raise ValueError("relation blocks do not match the port counts")
        if r.dim != self.input_ports + self.output_ports:
            raise ValueError(
                f"behavior dimension {r.dim} is not the port count "
                f"{self.input_ports + self.output_ports}")


def to_circuit(markov: OpenNetwork) -> OpenNetwork:
    """Replace rates by conductances ``r_e q_source / 2``, dropping q.

    Same nodes, edges and ports; the resulting circuit has the same
    steady-state boundary behavior up to the population rescaling.
    """
    net = _require_kind(markov, DETAILED_BALANCED, "to_circuit")
    edges = tuple(
        Edge(e.id, e.source, e.target,
             equivalent_conductance(e, net.populations))
        for e in net.edges)
    return OpenNetwork(Network(CIRCUIT, net.nodes, edges),
                       markov.inputs, markov.outputs)


def _port_indices(net: OpenNetwork) -> tuple[list[int], list[int]]:
    order = {n: k for k, n in enumerate(net.terminals)}
    return ([order[n] for n in net.inputs], [order[n] for n in net.outputs])


def blackbox_circuit(circuit: OpenNetwork,
                     rank_tol: float = RANK_TOL) -> BoundaryBehavior:
    """Behavior of an open circuit: potential-current pairs at the ports.

    The port relation is applied pointwise to the graph of the
    Dirichlet-to-Neumann map over the terminals.
    """
    _require_kind(circuit, CIRCUIT, "blackbox_circuit")
    i_map, o_map = _port_indices(circuit)
    graph = graph_of_boundary_map(circuit, rank_tol=rank_tol)
    ports = port_relation(i_map, o_map, len(circuit.terminals),
                          rank_tol=rank_tol)
    image = apply_relation_to_subspace(ports, graph.space, rank_tol=rank_tol)
    relation = LinearRelation(2 * len(i_map), 2 * len(o_map), image)
    return BoundaryBehavior(len(i_map), len(o_map), relation)


def _port_populations(markov: OpenNetwork) -> tuple[tuple[float, ...],
                                                    tuple[float, ...]]:
    q = markov.network.populations
    return (tuple(q[n] for n in markov.inputs),
            tuple(q[n] for n in markov.outputs))


def blackbox_markov(markov: OpenNetwork,
                    rank_tol: float = RANK_TOL) -> BoundaryBehavior:
    """Behavior of a detailed balanced Markov network at its ports.

    Production recipe: black-box the equivalent circuit, then conjugate by
    the rescaling between potential-current and population-flow pairs on
    each side.
    """
    _require_kind(markov, DETAILED_BALANCED, "blackbox_markov")
    in_pops, out_pops = _port_populations(markov)
    circuit_behavior = blackbox_circuit(to_circuit(markov), rank_tol=rank_tol)
    relation = circuit_behavior.relation
    if in_pops:
        _, from_pop = population_rescaling(np.asarray(in_pops))
        relation = compose_relations(from_pop, relation, rank_tol=rank_tol)
    if out_pops:
        to_pop, _ = population_rescaling(np.asarray(out_pops))
        relation = compose_relations(relation, to_pop, rank_tol=rank_tol)
    return BoundaryBehavior(len(in_pops), len(out_pops), relation,
                            in_pops, out_pops)


def blackbox_markov_direct(markov: OpenNetwork,
                           rank_tol: float = RANK_TOL) -> BoundaryBehavior:
    """Behavior from boundary flows directly, no circuit detour.

    Applies the port relation to the graph of the boundary population-to-
    flow map; serves as the independent oracle for :func:`check_triangle`.
    """
    _require_kind(markov, DETAILED_BALANCED, "blackbox_markov_direct")
    i_map, o_map = _port_indices(markov)
    graph = graph_of_boundary_map(markov, rank_tol=rank_tol)
    ports = port_relation(i_map, o_map, len(markov.terminals),
                          rank_tol=rank_tol)
    image = apply_relation_to_subspace(ports, graph.space, rank_tol=rank_tol)
    relation = LinearRelation(2 * len(i_map), 2 * len(o_map), image)
    in_pops, out_pops = _port_populations(markov)
    return BoundaryBehavior(len(i_map), len(o_map), relation,
                            in_pops, out_pops)


def dagger_behavior(behavior: BoundaryBehavior) -> BoundaryBehavior:
    """The behavior of the daggered (port-swapped) network.

    Swapping inputs and outputs exchanges the two blocks of the relation and
    flips the sign of every port current: a port that measured inflow
    measures outflow afterwards.  The plain relational transpose alone is
    *not* the image of the network dagger; it differs from it by exactly
    this current negation.
    """
    rel = behavior.relation
    basis = np.vstack([rel.target_block(), rel.source_block()]).copy()
    ny, nx = behavior.output_ports, behavior.input_ports
    basis[ny:2 * ny] *= -1.0
    basis[2 * ny + nx:] *= -1.0
    flipped = LinearRelation(rel.target_dim, rel.source_dim,
                             Subspace(rel.space.ambient_dim, basis))
    return BoundaryBehavior(ny, nx, flipped,
                            behavior.output_populations,
                            behavior.input_populations)


def _pair_interleave(n1: int, n2: int) -> list[int]:
    """(values1, currents1, values2, currents2) -> concatenated pair layout."""
    return (list(range(n1)) + list(range(2 * n1, 2 * n1 + n2))
            + list(range(n1, 2 * n1))
            + list(range(2 * n1 + n2, 2 * (n1 + n2))))


def oplus_behaviors(first: BoundaryBehavior,
                    second: BoundaryBehavior) -> BoundaryBehavior:
    """Behavior of two systems side by side, ports concatenated.

    Direct sum of the relations, reordered so that each side reads
    (all potentials, then all currents) over the combined port list; equals
    the behavior of the tensored network.
    """
    raw = oplus(first.relation, second.relation)
    relation = permute_coordinates(
        raw,
        _pair_interleave(first.input_ports, second.input_ports),
        _pair_interleave(first.output_ports, second.output_ports))
    pops = (first.input_populations, second.input_populations,
            first.output_populations, second.output_populations)
    if all(p is None for p in pops):
        in_pops = out_pops = None
    elif any(p is None for p in pops):
        raise ValueError("cannot sum a circuit behavior with a Markov one")
    else:
        in_pops = pops[0] + pops[1]
        out_pops = pops[2] + pops[3]
    return BoundaryBehavior(first.input_ports + second.input_ports,
                            first.output_ports + second.output_ports,
                            relation, in_pops, out_pops)


@dataclass(frozen=True)
class TriangleReport:
    """Agreement of the two behavior constructions for one network."""

    distance: float
    tol: float
    direct_dim: int
    recipe_dim: int

    @property
    def passed(self) -> bool:
        return self.direct_dim == self.recipe_dim and self.distance < self.tol


def check_triangle(markov: OpenNetwork, tol: float = 1e-8,
                   rank_tol: float = RANK_TOL) -> TriangleReport:
    """Compare the circuit-recipe behavior against the direct construction.

    Both relations are computed independently and their subspace distance
    (sine of the largest principal angle) is reported against ``tol``.
    """
    direct = blackbox_markov_direct(markov, rank_tol=rank_tol)
    recipe = blackbox_markov(markov, rank_tol=rank_tol)
    distance = subspace_distance(direct.relation.space, recipe.relation.space)
    return TriangleReport(distance, tol, direct.relation.dim,
                          recipe.relation.dim)


def check_lagrangian_behavior(behavior: BoundaryBehavior,
                              tol: float = 1e-8) -> bool:
    """Whether a behavior is Lagrangian for its natural symplectic forms.

    Circuit behaviors use unit weights; behaviors carrying port populations
    use them as weights.
    """
    src = behavior.input_populations
    tgt = behavior.output_populations
    return is_lagrangian(
        behavior.relation,
        None if src is None else np.asarray(src),
        None if tgt is None else np.asarray(tgt),
        tol=tol)


def _rref(mat: np.ndarray, tol: float = 1e-11) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with partial pivoting; returns pivot columns."""
    a = np.array(mat, dtype=float)
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    scale = np.max(np.abs(a), initial=0.0) or 1.0
    for c in range(cols):
        if r >= rows:
            break
        pivot_row = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[pivot_row, c]) <= tol * scale:
            continue
        a[[r, pivot_row]] = a[[pivot_row, r]]
        a[r] /= a[r, c]
        for rr in range(rows):
            if rr != r and a[rr, c] != 0.0:
                a[rr] -= a[rr, c] * a[r]
        pivots.append(c)
        r += 1
    a[np.abs(a) <= tol] = 0.0
    return a[:r], pivots


def _variable_names(behavior: BoundaryBehavior) -> list[str]:
    markov = behavior.input_populations is not None
    value, response = ("p", "j") if markov else ("phi", "iota")
    names = []
    for side, count in (("x", behavior.input_ports),
                        ("y", behavior.output_ports)):
        names += [f"{value}_{side}{k + 1}" for k in range(count)]
        names += [f"{response}_{side}{k + 1}" for k in range(count)]
    return names


def _elimination_order(behavior: BoundaryBehavior) -> list[int]:
    """Column priority for row reduction: currents/flows first, then values."""
    nx, ny = behavior.input_ports, behavior.output_ports
    currents = list(range(nx, 2 * nx)) + list(range(2 * nx + ny, 2 * nx + 2 * ny))
    values = list(range(nx)) + list(range(2 * nx, 2 * nx + ny))
    return currents + values


def behavior_equations(behavior: BoundaryBehavior) -> list[str]:
    """The behavior as human-readable linear equations on the port data.

    Row-reduces a basis of the behavior's orthogonal complement and solves
    each row for its pivot variable, pivoting on flow/current variables
    before population/potential ones so the usual response form comes out.
    Variables are named ``p``/``j`` (populations/flows) for Markov behaviors
    and ``phi``/``iota`` (potentials/currents) for circuits, indexed by port.
    """
    space = behavior.relation.space
    complement = np.eye(space.ambient_dim) - space.projector()
    u, s, _ = np.linalg.svd(complement)
    count = int(np.sum(s > 0.5))  # projector spectrum is 0/1
    if count == 0:
        return []
    order = _elimination_order(behavior)
    reduced, pivots = _rref(u[order, :count].T)
    names = _variable_names(behavior)
    equations = []
    for row, pivot in zip(reduced, pivots):
        terms = []
        for c in np.flatnonzero(row):
            if c == pivot:
                continue
            coeff = float(round(-row[c], 12))
            sign = "-" if coeff < 0 else "+"
            mag = abs(coeff)
            term = names[order[c]] if mag == 1.0 \
                else f"{mag!r}*{names[order[c]]}"
            terms.append((sign, term))
        if not terms:
            rhs = "0"
        else:
            first_sign, first_term = terms[0]
            rhs = ("-" if first_sign == "-" else "") + first_term
            for sign, term in terms[1:]:
                rhs += f" {sign} {term}"
        equations.append(f"{names[order[pivot]]} = {rhs}")
    return equations
