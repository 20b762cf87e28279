"""Generators of random and worked example networks.

The detailed balanced generator draws symmetric equilibrium flows first and
then sets the two directed rates of each connection to ``flow / q_source``,
so detailed balance holds by construction whatever the populations are.
Port maps are drawn with replacement, so non-injective maps (several ports
on one node) occur routinely.
"""

from __future__ import annotations

import numpy as np

from .dynamics import generator_matrix
from .network import (CIRCUIT, DETAILED_BALANCED, Edge, Network, OpenNetwork)


def demo_two_state() -> OpenNetwork:
    """Two states a, b with populations 2, 1; rates a->b 3 and b->a 6.

    Input port on a, output port on b.  Flows balance: 3*2 = 6*1.
    """
    net = Network(
        DETAILED_BALANCED, ("a", "b"),
        (Edge("ab", "a", "b", 3.0), Edge("ba", "b", "a", 6.0)),
        {"a": 2.0, "b": 1.0})
    return OpenNetwork(net, ("a",), ("b",))


def demo_four_state() -> OpenNetwork:
    """Four-state detailed balanced network with two inputs and one output."""
    net = Network(
        DETAILED_BALANCED, ("m1", "m2", "m3", "m4"),
        (Edge("e1", "m3", "m4", 4.0), Edge("e2", "m4", "m3", 2.0),
         Edge("e3", "m2", "m3", 2.0), Edge("e4", "m3", "m2", 1.0),
         Edge("e5", "m1", "m3", 0.5), Edge("e6", "m3", "m1", 3.0)),
        {"m1": 6.0, "m2": 0.5, "m3": 1.0, "m4": 2.0})
    return OpenNetwork(net, ("m1", "m2"), ("m4",))


def demo_three_state() -> OpenNetwork:
    """Three-state detailed balanced network composable after demo_four_state.

    Its single input has population 2, matching demo_four_state's output.
    """
    net = Network(
        DETAILED_BALANCED, ("n1", "n2", "n3"),
        (Edge("e1", "n1", "n2", 2.0), Edge("e2", "n1", "n3", 12.0),
         Edge("e3", "n2", "n1", 1.0), Edge("e4", "n2", "n3", 2.0),
         Edge("e5", "n3", "n1", 3.0), Edge("e6", "n3", "n2", 1.0)),
        {"n1": 2.0, "n2": 4.0, "n3": 8.0})
    return OpenNetwork(net, ("n1",), ("n3",))


def _balanced_pair_edges(edges: list[Edge], i: str, j: str, flow: float,
                         q: dict[str, float]) -> None:
    k = len(edges)
    edges.append(Edge(f"e{k}", i, j, flow / q[i]))
    edges.append(Edge(f"e{k + 1}", j, i, flow / q[j]))


def random_detailed_balanced_network(
        rng: np.random.Generator,
        n_nodes: int | None = None,
        q_range: tuple[float, float] = (0.1, 10.0),
        flow_range: tuple[float, float] = (0.1, 10.0),
        extra_pairs: int | None = None,
        self_loop_prob: float = 0.1,
        forced_populations: dict[str, float] | None = None) -> Network:
    """A random detailed balanced network, balanced by construction.

    A random spanning tree keeps the graph connected; extra pairs drawn with
    replacement produce parallel edges now and then.  ``forced_populations``
    pins the populations of the named nodes (which must be among the first
    node names ``n0..``); remaining nodes draw from ``q_range``.
    """
    if n_nodes is None:
        n_nodes = int(rng.integers(2, 21))
    names = [f"n{k}" for k in range(n_nodes)]
    q = {n: float(rng.uniform(*q_range)) for n in names}
    if forced_populations:
        q.update(forced_populations)
    edges: list[Edge] = []
    for k in range(1, n_nodes):
        partner = names[int(rng.integers(0, k))]
        _balanced_pair_edges(edges, names[k], partner,
                             float(rng.uniform(*flow_range)), q)
    if extra_pairs is None:
        extra_pairs = int(rng.integers(0, n_nodes))
    for _ in range(extra_pairs):
        i, j = rng.integers(0, n_nodes, size=2)
        if i == j:
            continue
        _balanced_pair_edges(edges, names[int(i)], names[int(j)],
                             float(rng.uniform(*flow_range)), q)
    if rng.uniform() < self_loop_prob:
        n = names[int(rng.integers(0, n_nodes))]
        edges.append(Edge(f"e{len(edges)}", n, n,
                          float(rng.uniform(*flow_range))))
    return Network(DETAILED_BALANCED, tuple(names), tuple(edges), q)


def _random_ports(rng: np.random.Generator, nodes, max_ports: int) -> tuple:
    count = int(rng.integers(1, max_ports + 1))
    return tuple(nodes[int(k)] for k in rng.integers(0, len(nodes), count))


def random_open_markov(
        rng: np.random.Generator,
        n_nodes: int | None = None,
        max_ports: int = 3,
        input_populations=None,
        **net_kwargs) -> OpenNetwork:
    """A random open detailed balanced Markov network.

    When ``input_populations`` is given (one value per input port, in
    order), the input side is built to match it exactly: ports with equal
    populations are randomly grouped onto shared nodes, so the result is
    composable after a network with that output signature.
    """
    forced: dict[str, float] = {}
    inputs: list[str] = []
    if input_populations is not None:
        values = [float(v) for v in input_populations]
        assignment: dict[int, tuple[float, int]] = {}
        by_value: dict[float, list[int]] = {}
        for pos, v in enumerate(values):
            by_value.setdefault(v, []).append(pos)
        for v, positions in by_value.items():
            n_groups = int(rng.integers(1, len(positions) + 1))
            for pos in positions:
                assignment[pos] = (v, int(rng.integers(0, n_groups)))
        # allocate one node per (value, used group)
        node_of: dict[tuple[float, int], str] = {}
        for pos in range(len(values)):
            key = assignment[pos]
            if key not in node_of:
                name = f"n{len(node_of)}"
                node_of[key] = name
                forced[name] = key[0]
            inputs.append(node_of[key])
        if n_nodes is None:
            n_nodes = len(node_of) + int(rng.integers(1, 6))
        n_nodes = max(n_nodes, len(node_of))
    elif n_nodes is None:
        n_nodes = int(rng.integers(2, 10))

    net = random_detailed_balanced_network(
        rng, n_nodes=n_nodes, forced_populations=forced or None, **net_kwargs)
    if input_populations is None:
        inputs = list(_random_ports(rng, net.nodes, max_ports))
    outputs = _random_ports(rng, net.nodes, max_ports)
    return OpenNetwork(net, tuple(inputs), outputs)


def random_composable_markov_pair(
        rng: np.random.Generator) -> tuple[OpenNetwork, OpenNetwork]:
    """Two open detailed balanced networks with matching glue populations."""
    first = random_open_markov(rng)
    interface = [first.network.population(n) for n in first.outputs]
    second = random_open_markov(rng, input_populations=interface)
    return first, second


def random_circuit_network(
        rng: np.random.Generator,
        n_nodes: int | None = None,
        conductance_range: tuple[float, float] = (0.1, 10.0),
        extra_edges: int | None = None) -> Network:
    if n_nodes is None:
        n_nodes = int(rng.integers(2, 10))
    names = [f"n{k}" for k in range(n_nodes)]
    edges: list[Edge] = []
    for k in range(1, n_nodes):
        partner = names[int(rng.integers(0, k))]
        edges.append(Edge(f"e{len(edges)}", names[k], partner,
                          float(rng.uniform(*conductance_range))))
    if extra_edges is None:
        extra_edges = int(rng.integers(0, n_nodes))
    for _ in range(extra_edges):
        i, j = rng.integers(0, n_nodes, size=2)
        edges.append(Edge(f"e{len(edges)}", names[int(i)], names[int(j)],
                          float(rng.uniform(*conductance_range))))
    return Network(CIRCUIT, tuple(names), tuple(edges))


def random_open_circuit(rng: np.random.Generator,
                        n_inputs: int | None = None,
                        n_outputs: int | None = None,
                        **net_kwargs) -> OpenNetwork:
    net = random_circuit_network(rng, **net_kwargs)
    if n_inputs is None:
        inputs = _random_ports(rng, net.nodes, 3)
    else:
        inputs = tuple(net.nodes[int(k)]
                       for k in rng.integers(0, len(net.nodes), n_inputs))
    if n_outputs is None:
        outputs = _random_ports(rng, net.nodes, 3)
    else:
        outputs = tuple(net.nodes[int(k)]
                        for k in rng.integers(0, len(net.nodes), n_outputs))
    return OpenNetwork(net, inputs, outputs)


def random_composable_circuit_pair(
        rng: np.random.Generator) -> tuple[OpenNetwork, OpenNetwork]:
    first = random_open_circuit(rng)
    second = random_open_circuit(rng, n_inputs=len(first.outputs))
    return first, second


def random_relaxing_open_markov(
        rng: np.random.Generator,
        horizon: float = 50.0,
        decay_margin: float = 23.0,
        max_attempts: int = 200) -> tuple[OpenNetwork, float]:
    """An open detailed balanced network that settles within the horizon.

    Returns the network together with ``t_end = horizon / |G|_inf``.
    Samples are rejected until the slowest internal relaxation rate lambda
    satisfies ``lambda * t_end >= decay_margin``, so integrating to t_end
    provably lands within exp(-decay_margin) of the steady state.  Detailed
    balance makes the internal generator block similar to a symmetric
    matrix, so its spectrum is real and cheap to bound.
    """
    for _ in range(max_attempts):
        n = int(rng.integers(3, 9))
        net = random_detailed_balanced_network(
            rng, n_nodes=n, q_range=(0.5, 2.0), flow_range=(0.5, 2.0),
            extra_pairs=n, self_loop_prob=0.0)
        n_internal = int(rng.integers(1, 3))
        internal = set(rng.choice(n, size=n_internal, replace=False).tolist())
        terminal_names = [net.nodes[k] for k in range(n) if k not in internal]
        if not terminal_names:
            continue
        side = rng.integers(0, 2, size=len(terminal_names))
        inputs = [t for t, s in zip(terminal_names, side) if s == 0]
        outputs = [t for t, s in zip(terminal_names, side) if s == 1]
        if not inputs:
            inputs = [terminal_names[0]]
        if not outputs:
            outputs = [terminal_names[-1]]
        if rng.uniform() < 0.3:
            inputs.append(inputs[0])
        open_net = OpenNetwork(net, tuple(inputs), tuple(outputs))

        gen = generator_matrix(net)
        t_end = horizon / gen.inf_norm
        idx = sorted(internal)
        q = np.array([net.population(net.nodes[k]) for k in idx])
        block = gen.matrix[np.ix_(idx, idx)]
        sym = np.diag(q ** -0.5) @ block @ np.diag(q ** 0.5)
        lam_min = float(np.min(np.linalg.eigvalsh(-(sym + sym.T) / 2.0)))
        if lam_min * t_end >= decay_margin:
            return open_net, t_end
    raise RuntimeError("no fast-relaxing sample found; widen the parameters")
