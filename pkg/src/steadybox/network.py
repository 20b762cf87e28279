"""Open networks and their gluing algebra.

A network is a finite labelled multigraph of one of three kinds: a Markov
chain (edges carry transition rates), a detailed balanced Markov chain
(additionally every node carries a positive equilibrium population), or a
resistor circuit (edges carry conductances).  An open network designates
ordered lists of input and output ports, each port naming a node.  Open
networks are glued end to end (``compose``), placed side by side
(``tensor``), or reversed (``dagger``); the node set of a composite is the
pushout identifying output port k of the first network with input port k of
the second.

All values are immutable after construction and every operation is a pure
function, so instances may be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

MARKOV = "markov"
DETAILED_BALANCED = "detailed_balanced_markov"
CIRCUIT = "circuit"
KINDS = (MARKOV, DETAILED_BALANCED, CIRCUIT)

#: Default relative tolerance for population matching and detailed balance.
DEFAULT_TOL = 1e-9


class NetworkError(ValueError):
    """A network or open network violates a structural invariant."""


class CompositionError(NetworkError):
    """Two open networks cannot be composed or tensored."""


@dataclass(frozen=True)
class Edge:
    """A directed labelled edge.

    ``weight`` is the rate constant (units 1/time) for Markov kinds and the
    conductance (units 1/resistance) for circuits.  Self-loops and parallel
    edges are permitted.
    """

    id: str
    source: str
    target: str
    weight: float

    def __post_init__(self):
        if not (isinstance(self.weight, (int, float))
                and math.isfinite(self.weight) and self.weight > 0):
            raise NetworkError(
                f"edge {self.id!r}: weight must be finite and positive, "
                f"got {self.weight!r}")
        object.__setattr__(self, "weight", float(self.weight))


@dataclass(frozen=True)
class Network:
    """A closed network: node list, edge list, and kind.

    ``populations`` is required exactly for the detailed balanced kind.  The
    detailed balance condition itself is *not* enforced here; use
    :func:`validate` or :func:`steadybox.dynamics.check_detailed_balance`, so
    that violating instances can still be inspected and reported on.
    """

    kind: str
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...] = ()
    populations: Mapping[str, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.kind not in KINDS:
            raise NetworkError(f"unknown network kind {self.kind!r}")
        if len(set(self.nodes)) != len(self.nodes):
            raise NetworkError("node identifiers must be unique")
        node_set = set(self.nodes)
        seen_edges = set()
        for e in self.edges:
            if e.id in seen_edges:
                raise NetworkError(f"duplicate edge id {e.id!r}")
            seen_edges.add(e.id)
            if e.source not in node_set or e.target not in node_set:
                raise NetworkError(
                    f"edge {e.id!r} references unknown node "
                    f"{e.source!r} or {e.target!r}")
        if self.kind == DETAILED_BALANCED:
            if self.populations is None:
                raise NetworkError(
                    "detailed balanced networks require populations")
            pops = {str(k): float(v) for k, v in self.populations.items()}
            if set(pops) != node_set:
                raise NetworkError(
                    "populations must be given for exactly the nodes")
            for n, q in pops.items():
                if not (math.isfinite(q) and q > 0):
                    raise NetworkError(
                        f"population of node {n!r} must be finite and "
                        f"positive, got {q!r}")
            object.__setattr__(self, "populations", pops)
        elif self.populations is not None:
            raise NetworkError(
                f"populations are only allowed for kind {DETAILED_BALANCED!r}")

    def population(self, node: str) -> float:
        return self.populations[node]


@dataclass(frozen=True)
class OpenNetwork:
    """A network with ordered input and output ports.

    Ports are node ids; the maps need not be injective and a node may appear
    on both sides.  Terminals are the nodes hit by at least one port, in
    first-appearance order scanning inputs then outputs; every other node is
    internal.
    """

    network: Network
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        node_set = set(self.network.nodes)
        for side, ports in (("input", self.inputs), ("output", self.outputs)):
            for k, n in enumerate(ports):
                if n not in node_set:
                    raise NetworkError(
                        f"{side} port {k} names unknown node {n!r}")

    @property
    def kind(self) -> str:
        return self.network.kind

    @property
    def terminals(self) -> tuple[str, ...]:
        seen = []
        for n in self.inputs + self.outputs:
            if n not in seen:
                seen.append(n)
        return tuple(seen)

    @property
    def internal_nodes(self) -> tuple[str, ...]:
        t = set(self.terminals)
        return tuple(n for n in self.network.nodes if n not in t)

    def input_signature(self) -> PortSignature:
        return self._signature(self.inputs)

    def output_signature(self) -> PortSignature:
        return self._signature(self.outputs)

    def _signature(self, ports: tuple[str, ...]) -> PortSignature:
        if self.kind == DETAILED_BALANCED:
            pops = tuple(self.network.population(n) for n in ports)
            return PortSignature(len(ports), pops)
        return PortSignature(len(ports))


@dataclass(frozen=True)
class PortSignature:
    """What an open network exposes on one side: a port count, and for the
    detailed balanced kind the population at each port."""

    count: int
    populations: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.populations is not None:
            object.__setattr__(self, "populations", tuple(self.populations))
            if len(self.populations) != self.count:
                raise NetworkError("one population per port required")
            for q in self.populations:
                if not (math.isfinite(q) and q > 0):
                    raise NetworkError(
                        f"port population must be finite and positive, got {q!r}")


@dataclass(frozen=True)
class ValidationFinding:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[ValidationFinding, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings


def pairwise_flow_residual(net: Network) -> float:
    """Largest violation of detailed balance, in flow units.

    For every node pair the total flow i->j at the chosen populations,
    ``sum of rate * q_source`` over edges i->j, must equal the total flow
    j->i.  Returns the maximum absolute difference (0.0 for edgeless nets).
    """
    flow: dict[tuple[str, str], float] = {}
    for e in net.edges:
        if e.source == e.target:
            continue
        flow[(e.source, e.target)] = (
            flow.get((e.source, e.target), 0.0)
            + e.weight * net.population(e.source))
    residual = 0.0
    for (i, j), f in flow.items():
        residual = max(residual, abs(f - flow.get((j, i), 0.0)))
    return residual


def _flow_scale(net: Network) -> float:
    scale = 0.0
    for e in net.edges:
        if e.source != e.target:
            scale = max(scale, e.weight * net.population(e.source))
    return scale if scale > 0 else 1.0


def validate(net: OpenNetwork, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check every invariant of an open network and report violations.

    Never raises: findings are returned for the caller to act on.  An empty
    report means the network is valid.  For the detailed balanced kind the
    report includes the detailed-balance flow residual whenever it exceeds
    ``tol`` times the largest single flow.
    """
    findings: list[ValidationFinding] = []
    g = net.network
    if len(set(g.nodes)) != len(g.nodes):
        findings.append(ValidationFinding(
            "duplicate-node", "node identifiers are not unique"))
    node_set = set(g.nodes)
    for e in g.edges:
        if not (math.isfinite(e.weight) and e.weight > 0):
            findings.append(ValidationFinding(
                "bad-weight",
                f"edge {e.id!r} has non-positive weight {e.weight!r}"))
        if e.source not in node_set or e.target not in node_set:
            findings.append(ValidationFinding(
                "dangling-edge",
                f"edge {e.id!r} references a missing node"))
    for side, ports in (("input", net.inputs), ("output", net.outputs)):
        for k, n in enumerate(ports):
            if n not in node_set:
                findings.append(ValidationFinding(
                    "dangling-port",
                    f"{side} port {k} names missing node {n!r}"))
    if g.kind == DETAILED_BALANCED:
        for n in g.nodes:
            q = g.populations.get(n)
            if q is None:
                findings.append(ValidationFinding(
                    "missing-population", f"node {n!r} has no population"))
            elif not (math.isfinite(q) and q > 0):
                findings.append(ValidationFinding(
                    "bad-population",
                    f"node {n!r} has non-positive population {q!r}"))
        if not findings:
            residual = pairwise_flow_residual(g)
            if residual > tol * _flow_scale(g):
                findings.append(ValidationFinding(
                    "detailed-balance",
                    f"detailed balance violated: flow residual {residual!r} "
                    f"exceeds tolerance {tol!r} at scale {_flow_scale(g)!r}"))
    return ValidationReport(tuple(findings))


def pushout(
    left_nodes: Sequence[str],
    right_nodes: Sequence[str],
    left_legs: Sequence[str],
    right_legs: Sequence[str],
) -> tuple[tuple[str, ...], dict[str, str], dict[str, str]]:
    """Quotient of the disjoint union of two node sets.

    ``left_legs[k]`` (a node of the left set) is identified with
    ``right_legs[k]`` (a node of the right set) for every k, and the
    equivalence relation these pairs generate is divided out.  Quotient
    classes are named deterministically: members are tagged ``0:`` (left) or
    ``1:`` (right) and the class takes its lexicographically least tagged
    member as its name.  Returns the quotient node order (first appearance,
    left nodes then right) and the two maps original id -> class name.
    """
    if len(left_legs) != len(right_legs):
        raise NetworkError("pushout legs must have equal length")
    tagged_left = {n: "0:" + n for n in left_nodes}
    tagged_right = {n: "1:" + n for n in right_nodes}
    parent: dict[str, str] = {}
    for t in list(tagged_left.values()) + list(tagged_right.values()):
        parent[t] = t

    def find(x: str) -> str:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            # lexicographically least member becomes the representative
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra

    for ln, rn in zip(left_legs, right_legs):
        if ln not in tagged_left:
            raise NetworkError(f"pushout leg names unknown left node {ln!r}")
        if rn not in tagged_right:
            raise NetworkError(f"pushout leg names unknown right node {rn!r}")
        union(tagged_left[ln], tagged_right[rn])

    order: list[str] = []
    seen: set[str] = set()
    for t in list(tagged_left.values()) + list(tagged_right.values()):
        rep = find(t)
        if rep not in seen:
            seen.add(rep)
            order.append(rep)
    left_map = {n: find(t) for n, t in tagged_left.items()}
    right_map = {n: find(t) for n, t in tagged_right.items()}
    return tuple(order), left_map, right_map


def _match_populations(m1: OpenNetwork, m2: OpenNetwork, tol: float) -> None:
    q1, q2 = m1.network.populations, m2.network.populations
    for k, (a, b) in enumerate(zip(m1.outputs, m2.inputs)):
        u, v = q1[a], q2[b]
        if abs(u - v) > tol * max(abs(u), abs(v)):
            raise CompositionError(
                f"population mismatch at glued port {k}: "
                f"{u!r} (output {a!r}) vs {v!r} (input {b!r})")


def compose(m1: OpenNetwork, m2: OpenNetwork,
            tol: float = DEFAULT_TOL) -> OpenNetwork:
    """Glue the outputs of ``m1`` to the inputs of ``m2``.

    Both networks keep all their edges (rates and conductances are
    unchanged); the node sets are merged by :func:`pushout`.  For the
    detailed balanced kind the populations at glued ports must match within
    the relative tolerance ``tol`` and the merged node inherits the left
    value.
    """
    if m1.kind != m2.kind:
        raise CompositionError(
            f"cannot compose kinds {m1.kind!r} and {m2.kind!r}")
    if len(m1.outputs) != len(m2.inputs):
        raise CompositionError(
            f"port count mismatch: {len(m1.outputs)} outputs vs "
            f"{len(m2.inputs)} inputs")
    if m1.kind == DETAILED_BALANCED:
        _match_populations(m1, m2, tol)

    nodes, lmap, rmap = pushout(
        m1.network.nodes, m2.network.nodes, m1.outputs, m2.inputs)
    edges = tuple(
        [Edge("0:" + e.id, lmap[e.source], lmap[e.target], e.weight)
         for e in m1.network.edges]
        + [Edge("1:" + e.id, rmap[e.source], rmap[e.target], e.weight)
           for e in m2.network.edges])
    populations = None
    if m1.kind == DETAILED_BALANCED:
        populations = {}
        for n in m1.network.nodes:
            populations.setdefault(lmap[n], m1.network.population(n))
        for n in m2.network.nodes:
            populations.setdefault(rmap[n], m2.network.population(n))
    net = Network(m1.kind, nodes, edges, populations)
    return OpenNetwork(
        net,
        tuple(lmap[n] for n in m1.inputs),
        tuple(rmap[n] for n in m2.outputs))


def tensor(m1: OpenNetwork, m2: OpenNetwork) -> OpenNetwork:
    """Disjoint union, ports concatenated (``m1`` ports first)."""
    if m1.kind != m2.kind:
        raise CompositionError(
            f"cannot tensor kinds {m1.kind!r} and {m2.kind!r}")
    nodes, lmap, rmap = pushout(m1.network.nodes, m2.network.nodes, (), ())
    edges = tuple(
        [Edge("0:" + e.id, lmap[e.source], lmap[e.target], e.weight)
         for e in m1.network.edges]
        + [Edge("1:" + e.id, rmap[e.source], rmap[e.target], e.weight)
           for e in m2.network.edges])
    populations = None
    if m1.kind == DETAILED_BALANCED:
        populations = {lmap[n]: q for n, q in m1.network.populations.items()}
        populations.update(
            {rmap[n]: q for n, q in m2.network.populations.items()})
    net = Network(m1.kind, nodes, edges, populations)
    return OpenNetwork(
        net,
        tuple(lmap[n] for n in m1.inputs) + tuple(rmap[n] for n in m2.inputs),
        tuple(lmap[n] for n in m1.outputs) + tuple(rmap[n] for n in m2.outputs))


def dagger(m: OpenNetwork) -> OpenNetwork:
    """Swap inputs and outputs; the underlying network is untouched."""
    return OpenNetwork(m.network, m.outputs, m.inputs)


def forget_populations(m: OpenNetwork) -> OpenNetwork:
    """Drop the equilibrium data of a detailed balanced open network."""
    if m.kind != DETAILED_BALANCED:
        raise NetworkError(
            f"forget_populations requires kind {DETAILED_BALANCED!r}, "
            f"got {m.kind!r}")
    return OpenNetwork(
        Network(MARKOV, m.network.nodes, m.network.edges), m.inputs, m.outputs)


def identity_network(kind: str, ports: Sequence[str],
                     populations: Mapping[str, float] | None = None
                     ) -> OpenNetwork:
    """The edgeless open network whose inputs and outputs are both ``ports``.

    Composing with it glues each port onto the matching node and adds
    nothing, so it acts as an identity up to node renaming.
    """
    net = Network(kind, tuple(dict.fromkeys(ports)), (), populations)
    return OpenNetwork(net, tuple(ports), tuple(ports))
