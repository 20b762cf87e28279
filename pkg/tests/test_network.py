import numpy as np
import pytest

from steadybox import (CIRCUIT, DETAILED_BALANCED, MARKOV, CompositionError,
                       Edge, Network, NetworkError, OpenNetwork,
                       check_detailed_balance, compose, dagger,
                       forget_populations, identity_network, pushout, tensor,
                       validate)
from steadybox.testing import random_composable_markov_pair, random_open_markov


def test_edge_rejects_bad_weight():
    with pytest.raises(NetworkError):
        Edge("e", "a", "b", 0.0)
    with pytest.raises(NetworkError):
        Edge("e", "a", "b", -1.0)
    with pytest.raises(NetworkError):
        Edge("e", "a", "b", float("nan"))


def test_network_structural_invariants():
    with pytest.raises(NetworkError):
        Network(MARKOV, ("a", "a"))
    with pytest.raises(NetworkError):
        Network(MARKOV, ("a",), (Edge("e", "a", "b", 1.0),))
    with pytest.raises(NetworkError):
        Network(MARKOV, ("a", "b"),
                (Edge("e", "a", "b", 1.0), Edge("e", "b", "a", 1.0)))
    with pytest.raises(NetworkError):
        Network(MARKOV, ("a",), (), populations={"a": 1.0})
    with pytest.raises(NetworkError):
        Network(DETAILED_BALANCED, ("a",), ())
    with pytest.raises(NetworkError):
        Network(DETAILED_BALANCED, ("a",), (), populations={"a": -2.0})
    with pytest.raises(NetworkError):
        Network("petri", ("a",))


def test_open_network_ports_must_exist():
    net = Network(MARKOV, ("a", "b"))
    with pytest.raises(NetworkError):
        OpenNetwork(net, ("c",), ())


def test_validate_two_state_is_clean(two_state):
    assert validate(two_state).ok


def test_validate_reports_detailed_balance_residual(two_state):
    g = two_state.network
    bad = Network(DETAILED_BALANCED, g.nodes, g.edges, {"a": 1.0, "b": 1.0})
    report = validate(OpenNetwork(bad, ("a",), ("b",)))
    assert not report.ok
    [finding] = report.findings
    assert finding.code == "detailed-balance"
    # flows are 3*1 and 6*1, so the residual is exactly 3
    assert "3.0" in finding.message


def test_validate_empty_network():
    empty = OpenNetwork(Network(MARKOV, ()), (), ())
    assert validate(empty).ok


def test_pushout_disjoint_union():
    nodes, lmap, rmap = pushout(("a", "b"), ("a", "c"), (), ())
    assert len(nodes) == 4
    assert set(lmap.values()).isdisjoint(set(rmap.values()))


def test_pushout_single_identification():
    nodes, lmap, rmap = pushout(("a",), ("b",), ("a",), ("b",))
    assert len(nodes) == 1
    assert lmap["a"] == rmap["b"]


def test_pushout_merges_across_sides():
    # both left legs on one node, two distinct right nodes: 3 nodes collapse
    nodes, lmap, rmap = pushout(("a", "z"), ("b", "c", "z"),
                                ("a", "a"), ("b", "c"))
    assert len(nodes) == 2 + 3 - 2
    assert lmap["a"] == rmap["b"] == rmap["c"]
    assert lmap["z"] != rmap["z"]


def test_pushout_deterministic_naming():
    first = pushout(("a", "b"), ("c",), ("b",), ("c",))
    second = pushout(("a", "b"), ("c",), ("b",), ("c",))
    assert first == second
    nodes, lmap, _ = first
    assert lmap["b"] == "0:b"  # least tagged member of the merged class


def test_compose_worked_pair(four_state, three_state):
    composite = compose(four_state, three_state)
    assert len(composite.network.nodes) == 6
    assert len(composite.network.edges) == 12
    assert len(composite.inputs) == 2
    assert len(composite.outputs) == 1
    assert check_detailed_balance(composite.network)
    # the glued node keeps the shared population
    merged = [n for n in composite.network.nodes if n.endswith("m4")]
    assert composite.network.population(merged[0]) == 2.0


def test_compose_kind_mismatch(two_state):
    circuit = OpenNetwork(Network(CIRCUIT, ("x",)), ("x",), ("x",))
    with pytest.raises(CompositionError):
        compose(two_state, circuit)


def test_compose_port_count_mismatch(two_state):
    with pytest.raises(CompositionError):
        compose(two_state, tensor(two_state, two_state))


def test_compose_population_mismatch():
    left = OpenNetwork(
        Network(DETAILED_BALANCED, ("a",), (), {"a": 2.0}), (), ("a",))
    right = OpenNetwork(
        Network(DETAILED_BALANCED, ("b",), (), {"b": 3.0}), ("b",), ())
    with pytest.raises(CompositionError, match="population mismatch"):
        compose(left, right)


def test_compose_with_identity(two_state):
    ports = two_state.outputs
    ident = identity_network(
        DETAILED_BALANCED, ports,
        {n: two_state.network.population(n) for n in ports})
    result = compose(two_state, ident)
    assert len(result.network.nodes) == len(two_state.network.nodes)
    weights = sorted(e.weight for e in result.network.edges)
    assert weights == sorted(e.weight for e in two_state.network.edges)


def test_compose_counts_additive(rng):
    for _ in range(10):
        m1, m2 = random_composable_markov_pair(rng)
        composite = compose(m1, m2)
        assert len(composite.network.edges) == \
            len(m1.network.edges) + len(m2.network.edges)
        assert len(composite.network.nodes) <= \
            len(m1.network.nodes) + len(m2.network.nodes)
        assert check_detailed_balance(composite.network, tol=1e-9)


def test_tensor_worked_pair(four_state, three_state):
    t = tensor(four_state, three_state)
    assert len(t.network.nodes) == 7
    assert len(t.network.edges) == 12
    assert len(t.inputs) == 3
    assert len(t.outputs) == 2
    assert check_detailed_balance(t.network)


def test_tensor_with_empty(two_state):
    empty = OpenNetwork(Network(DETAILED_BALANCED, (), (), {}), (), ())
    t = tensor(two_state, empty)
    assert len(t.network.nodes) == 2
    assert len(t.network.edges) == 2
    assert t.input_signature() == two_state.input_signature()


def test_tensor_single_nodes():
    a = OpenNetwork(Network(MARKOV, ("a",)), ("a",), ())
    b = OpenNetwork(Network(MARKOV, ("a",)), (), ("a",))
    t = tensor(a, b)
    assert len(t.network.nodes) == 2
    assert not t.network.edges


def test_dagger_involution(two_state, four_state):
    for net in (two_state, four_state):
        assert dagger(dagger(net)) == net
        assert len(dagger(net).inputs) == len(net.outputs)
        assert len(dagger(net).outputs) == len(net.inputs)
        assert dagger(net).network is net.network


def test_forget_populations(two_state):
    forgotten = forget_populations(two_state)
    assert forgotten.kind == MARKOV
    assert forgotten.network.populations is None
    assert [e.weight for e in forgotten.network.edges] == [3.0, 6.0]
    with pytest.raises(NetworkError):
        forget_populations(forgotten)


def test_forget_commutes_with_compose(rng):
    for _ in range(5):
        m1, m2 = random_composable_markov_pair(rng)
        direct = forget_populations(compose(m1, m2))
        pieces = compose(forget_populations(m1), forget_populations(m2))
        assert direct == pieces


def test_forget_edgeless():
    net = OpenNetwork(
        Network(DETAILED_BALANCED, ("a",), (), {"a": 1.0}), ("a",), ("a",))
    assert forget_populations(net).network == Network(MARKOV, ("a",))


def test_association_orders_agree_on_sizes(rng):
    for _ in range(5):
        m1, m2 = random_composable_markov_pair(rng)
        interface = [m2.network.population(n) for n in m2.outputs]
        m3 = random_open_markov(rng, input_populations=interface)
        left = compose(compose(m1, m2), m3)
        right = compose(m1, compose(m2, m3))
        assert len(left.network.nodes) == len(right.network.nodes)
        assert len(left.network.edges) == len(right.network.edges)
        assert sorted(e.weight for e in left.network.edges) == \
            pytest.approx(sorted(e.weight for e in right.network.edges))


def test_signatures(two_state):
    sig = two_state.output_signature()
    assert sig.count == 1 and sig.populations == (1.0,)
    assert two_state.terminals == ("a", "b")
    assert two_state.internal_nodes == ()


def test_terminal_order_first_appearance():
    net = Network(MARKOV, ("a", "b", "c"))
    open_net = OpenNetwork(net, ("b", "a"), ("b", "c"))
    assert open_net.terminals == ("b", "a", "c")
    assert open_net.internal_nodes == ()
