import warnings

import numpy as np
import pytest

from steadybox import (CIRCUIT, DETAILED_BALANCED, Edge, Network,
                       NetworkError, OpenNetwork, Subspace, boundary_current,
                       boundary_flow, dissipation_laplacian, dtn_matrix,
                       extended_dissipation, extended_power, generator_matrix,
                       graph_of_boundary_map, laplacian, minimize_dissipation,
                       minimize_power, subspace_distance, subspace_equal,
                       to_circuit)
from steadybox.testing import (random_circuit_network,
                               random_detailed_balanced_network,
                               random_open_circuit, random_open_markov)


def single_edge_circuit(c=3.0):
    net = Network(CIRCUIT, ("x", "y"), (Edge("e", "x", "y", c),))
    return OpenNetwork(net, ("x",), ("y",))


def series_circuit():
    """a - b - c with unit conductances, b internal."""
    net = Network(CIRCUIT, ("a", "b", "c"),
                  (Edge("1", "a", "b", 1.0), Edge("2", "b", "c", 1.0)))
    return OpenNetwork(net, ("a",), ("c",))


def test_extended_power_examples():
    net = single_edge_circuit(3.0).network
    assert extended_power(net, [1.0, 1.0]) == 0.0
    assert extended_power(net, [1.0, 0.0]) == 1.5
    parallel = Network(CIRCUIT, ("x", "y"),
                       (Edge("1", "x", "y", 3.0), Edge("2", "y", "x", 3.0)))
    assert extended_power(parallel, [1.0, 0.0]) == 3.0


def test_extended_power_wrong_kind(two_state):
    with pytest.raises(NetworkError):
        extended_power(two_state.network, [1.0, 0.0])


def test_extended_dissipation_examples(two_state):
    net = two_state.network
    for lam in (0.5, 1.0, 3.0):
        assert extended_dissipation(net, lam * np.array([2.0, 1.0])) \
            == pytest.approx(0.0, abs=1e-15)
    assert extended_dissipation(net, [2.0, 0.0]) == 3.0
    single = Network(DETAILED_BALANCED, ("a",), (), {"a": 2.0})
    assert extended_dissipation(single, [7.0]) == 0.0


def test_laplacian_examples():
    single = single_edge_circuit(2.0).network
    np.testing.assert_array_equal(laplacian(single).matrix,
                                  [[2.0, -2.0], [-2.0, 2.0]])
    edgeless = Network(CIRCUIT, ("x", "y"))
    np.testing.assert_array_equal(laplacian(edgeless).matrix, np.zeros((2, 2)))
    parallel = Network(CIRCUIT, ("x", "y"),
                       (Edge("1", "x", "y", 3.0), Edge("2", "y", "x", 3.0)))
    np.testing.assert_array_equal(laplacian(parallel).matrix,
                                  [[6.0, -6.0], [-6.0, 6.0]])


def test_laplacian_matches_edge_sum(rng):
    for _ in range(10):
        net = random_circuit_network(rng)
        lap = laplacian(net)
        phi = rng.uniform(-2.0, 2.0, len(net.nodes))
        assert abs(lap.value(phi) - extended_power(net, phi)) \
            <= 1e-12 * max(1.0, abs(lap.value(phi)))


def test_laplacian_row_sums_vanish(rng):
    net = random_circuit_network(rng)
    lap = laplacian(net).matrix
    np.testing.assert_allclose(lap.sum(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(lap, lap.T)


def test_dissipation_laplacian_is_circuit_laplacian(rng):
    for _ in range(5):
        net = random_detailed_balanced_network(rng, n_nodes=6)
        open_net = OpenNetwork(net, (net.nodes[0],), (net.nodes[1],))
        direct = dissipation_laplacian(net).matrix
        via_circuit = laplacian(to_circuit(open_net).network).matrix
        np.testing.assert_array_equal(direct, via_circuit)


def test_minimize_power_all_terminal():
    net = Network(CIRCUIT, ("x", "y"), (Edge("e", "x", "y", 2.0),))
    open_net = OpenNetwork(net, ("x",), ("y",))
    np.testing.assert_array_equal(minimize_power(open_net, [4.0, -1.0]),
                                  [4.0, -1.0])


def test_minimize_power_voltage_divider():
    phi = minimize_power(series_circuit(), [1.0, 0.0])
    np.testing.assert_allclose(phi, [1.0, 0.5, 0.0])


def test_minimize_power_constant_boundary():
    phi = minimize_power(series_circuit(), [2.0, 2.0])
    np.testing.assert_allclose(phi, [2.0, 2.0, 2.0])
    assert extended_power(series_circuit().network, phi) \
        == pytest.approx(0.0, abs=1e-14)


def test_minimize_power_is_optimal(rng):
    for _ in range(5):
        circuit = random_open_circuit(rng)
        net = circuit.network
        psi = rng.uniform(-2.0, 2.0, len(circuit.terminals))
        star = minimize_power(circuit, psi)
        base = extended_power(net, star)
        index = {n: k for k, n in enumerate(net.nodes)}
        internal = [index[n] for n in circuit.internal_nodes]
        if not internal:
            continue
        for _ in range(100):
            delta = np.zeros(len(net.nodes))
            delta[internal] = rng.uniform(-0.5, 0.5, len(internal))
            assert extended_power(net, star + delta) >= base - 1e-12


def test_minimize_dissipation_is_optimal(rng):
    for _ in range(5):
        markov = random_open_markov(rng)
        net = markov.network
        b = rng.uniform(0.1, 5.0, len(markov.terminals))
        star = minimize_dissipation(markov, b)
        base = extended_dissipation(net, star)
        index = {n: k for k, n in enumerate(net.nodes)}
        internal = [index[n] for n in markov.internal_nodes]
        if not internal:
            continue
        for _ in range(100):
            delta = np.zeros(len(net.nodes))
            delta[internal] = rng.uniform(-0.5, 0.5, len(internal))
            assert extended_dissipation(net, star + delta) >= base - 1e-12


def test_minimize_dissipation_equilibrium(two_state):
    p = minimize_dissipation(two_state, [2.0, 1.0])
    np.testing.assert_allclose(p, [2.0, 1.0])
    assert extended_dissipation(two_state.network, p) \
        == pytest.approx(0.0, abs=1e-14)


def test_minimize_dissipation_all_terminal(two_state):
    np.testing.assert_array_equal(minimize_dissipation(two_state, [5.0, 0.25]),
                                  [5.0, 0.25])


def test_minimize_dissipation_steady_state(rng):
    """Internal coordinates of the minimizer satisfy (G p) = 0."""
    for _ in range(10):
        markov = random_open_markov(rng)
        b = rng.uniform(0.1, 5.0, len(markov.terminals))
        p = minimize_dissipation(markov, b)
        gp = generator_matrix(markov.network).matrix @ p
        index = {n: k for k, n in enumerate(markov.network.nodes)}
        internal = [index[n] for n in markov.internal_nodes]
        scale = max(1.0, np.max(np.abs(gp)))
        assert np.max(np.abs(gp[internal]), initial=0.0) <= 1e-9 * scale


def test_boundary_current_examples():
    single = single_edge_circuit(2.0)
    np.testing.assert_allclose(boundary_current(single, [1.0, 0.0]),
                               [2.0, -2.0])
    np.testing.assert_allclose(boundary_current(single, [3.0, 3.0]),
                               [0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(boundary_current(series_circuit(), [1.0, 0.0]),
                               [0.5, -0.5])


def test_boundary_current_equals_laplacian_route(rng):
    for _ in range(10):
        circuit = random_open_circuit(rng)
        psi = rng.uniform(-2.0, 2.0, len(circuit.terminals))
        phi = minimize_power(circuit, psi)
        lap = laplacian(circuit.network).matrix
        index = {n: k for k, n in enumerate(circuit.network.nodes)}
        term = [index[n] for n in circuit.terminals]
        np.testing.assert_allclose(boundary_current(circuit, psi),
                                   (lap @ phi)[term], atol=1e-10)


def test_dtn_symmetry_and_conservation(rng):
    for _ in range(10):
        circuit = random_open_circuit(rng)
        schur = dtn_matrix(circuit)
        scale = max(1.0, np.max(np.abs(schur)))
        assert np.max(np.abs(schur - schur.T)) <= 1e-10 * scale
        psi = rng.uniform(-2.0, 2.0, len(circuit.terminals))
        assert abs(np.sum(schur @ psi)) <= 1e-10 * scale * max(
            1.0, np.max(np.abs(psi)))


def test_boundary_flow_examples(two_state):
    np.testing.assert_allclose(boundary_flow(two_state, [2.0, 1.0]),
                               [0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(boundary_flow(two_state, [2.0, 0.0]),
                               [6.0, -6.0])
    np.testing.assert_allclose(boundary_flow(two_state, [4.0, 0.0]),
                               2 * boundary_flow(two_state, [2.0, 0.0]))


def test_boundary_flow_conservation(rng):
    for _ in range(10):
        markov = random_open_markov(rng)
        b = rng.uniform(0.1, 5.0, len(markov.terminals))
        j = boundary_flow(markov, b)
        assert abs(j.sum()) <= 1e-10 * max(1.0, np.max(np.abs(j)))


def test_dissipation_value_reduces_to_power_value(rng):
    """min-over-interior dissipation at b equals the circuit's power at b/q."""
    for _ in range(10):
        markov = random_open_markov(rng)
        circuit = to_circuit(markov)
        q_term = np.array([markov.network.population(n)
                           for n in markov.terminals])
        b = rng.uniform(0.1, 5.0, len(markov.terminals))
        d_value = extended_dissipation(markov.network,
                                       minimize_dissipation(markov, b))
        q_value = extended_power(circuit.network,
                                 minimize_power(circuit, b / q_term))
        assert abs(d_value - q_value) <= 1e-10 * max(1.0, abs(d_value))


def test_boundary_graph_transport(rng):
    """The Markov boundary graph is the rescaled circuit boundary graph."""
    for _ in range(10):
        markov = random_open_markov(rng)
        circuit = to_circuit(markov)
        markov_graph = graph_of_boundary_map(markov)
        circuit_graph = graph_of_boundary_map(circuit)
        q_term = np.array([markov.network.population(n)
                           for n in markov.terminals])
        nt = len(markov.terminals)
        rescaled = circuit_graph.space.basis.copy()
        rescaled[:nt] *= q_term[:, None]
        transported = Subspace.from_columns(rescaled, ambient_dim=2 * nt)
        assert subspace_distance(markov_graph.space, transported) < 1e-8


def test_graph_of_boundary_map_examples(two_state):
    single = single_edge_circuit(2.0)
    graph = graph_of_boundary_map(single)
    expected = Subspace.from_spanning(
        [[1.0, 0.0, 2.0, -2.0], [0.0, 1.0, -2.0, 2.0]])
    assert subspace_equal(graph.space, expected, tol=1e-10)

    edgeless = OpenNetwork(Network(CIRCUIT, ("x", "y")), ("x",), ("y",))
    flat = graph_of_boundary_map(edgeless)
    expected_flat = Subspace.from_spanning(
        [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
    assert subspace_equal(flat.space, expected_flat, tol=1e-10)

    markov_graph = graph_of_boundary_map(two_state)
    expected_markov = Subspace.from_spanning(
        [[1.0, 0.0, 3.0, -3.0], [0.0, 1.0, -6.0, 6.0]])
    assert subspace_equal(markov_graph.space, expected_markov, tol=1e-10)


def test_isolated_internal_component_warns():
    net = Network(CIRCUIT, ("a", "b", "lonely"),
                  (Edge("e", "a", "b", 1.0),))
    open_net = OpenNetwork(net, ("a",), ("b",))
    with pytest.warns(UserWarning, match="lonely"):
        phi = minimize_power(open_net, [1.0, 0.0])
    np.testing.assert_allclose(phi, [1.0, 0.0, 0.0])
    with pytest.warns(UserWarning):
        schur = dtn_matrix(open_net)
    np.testing.assert_allclose(schur, [[1.0, -1.0], [-1.0, 1.0]])


def test_isolated_internal_behavior_well_defined():
    net = Network(DETAILED_BALANCED, ("a", "b", "c", "d"),
                  (Edge("1", "a", "b", 1.0), Edge("2", "b", "a", 2.0),
                   Edge("3", "c", "d", 1.0), Edge("4", "d", "c", 1.0)),
                  {"a": 2.0, "b": 1.0, "c": 1.0, "d": 1.0})
    open_net = OpenNetwork(net, ("a",), ("b",))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = minimize_dissipation(open_net, [2.0, 1.0])
        graph = graph_of_boundary_map(open_net)
    np.testing.assert_allclose(p, [2.0, 1.0, 0.0, 0.0], atol=1e-12)
    assert graph.space.dim == 2


def test_wrong_kind_errors(two_state):
    circuit = single_edge_circuit()
    with pytest.raises(NetworkError):
        minimize_power(two_state, [1.0, 0.0])
    with pytest.raises(NetworkError):
        minimize_dissipation(circuit, [1.0, 0.0])
    with pytest.raises(NetworkError):
        boundary_flow(circuit, [1.0, 0.0])
    with pytest.raises(NetworkError):
        boundary_current(two_state, [1.0, 0.0])
