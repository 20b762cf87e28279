import json

import pytest

from steadybox.cli import main
from steadybox.io import emit_network, parse_network
from steadybox.testing import demo_four_state, demo_three_state, demo_two_state

TWO_STATE = emit_network(demo_two_state())

UNBALANCED = TWO_STATE.replace('"population": 2.0', '"population": 1.0')

CIRCUIT_DOC = """{
  "format_version": "1",
  "kind": "circuit",
  "nodes": [{"id": "a"}, {"id": "b"}, {"id": "c"}],
  "edges": [{"source": "a", "target": "b", "conductance": 1.0},
            {"source": "b", "target": "c", "conductance": 1.0}],
  "inputs": ["a"],
  "outputs": ["c"]
}
"""


@pytest.fixture
def two_state_file(tmp_path):
    path = tmp_path / "twostate.json"
    path.write_text(TWO_STATE)
    return str(path)


@pytest.fixture
def circuit_file(tmp_path):
    path = tmp_path / "series.json"
    path.write_text(CIRCUIT_DOC)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def assert_deterministic(capsys, *argv):
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2
    assert out1.encode() == out2.encode()
    return code1, out1


def test_validate_ok(capsys, two_state_file):
    code, out = assert_deterministic(capsys, "validate", two_state_file)
    assert code == 0
    assert out == "ok\n"


def test_validate_detailed_balance_failure(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(UNBALANCED)
    code, out, _ = run(capsys, "validate", str(path))
    assert code == 3
    assert out.startswith("detailed-balance:")
    assert "residual 3.0" in out


def test_parse_error_exit_code(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{oops")
    code, out, err = run(capsys, "validate", str(path))
    assert code == 1
    assert "invalid JSON" in err


def test_schema_error_lists_pointer(capsys, tmp_path):
    doc = json.loads(TWO_STATE)
    doc["kind"] = "petri"
    path = tmp_path / "petri.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "validate", str(path))
    assert code == 1
    assert "/kind" in err


def test_missing_file_is_parse_error(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent/net.json")
    assert code == 1


def test_compose_worked_pair(capsys, tmp_path):
    first = tmp_path / "m.json"
    second = tmp_path / "n.json"
    first.write_text(emit_network(demo_four_state()))
    second.write_text(emit_network(demo_three_state()))
    out_path = tmp_path / "composite.json"
    code, _, _ = run(capsys, "compose", str(first), str(second),
                     "-o", str(out_path))
    assert code == 0
    composite = parse_network(out_path.read_text())
    assert len(composite.network.nodes) == 6
    assert len(composite.network.edges) == 12


def test_compose_mismatch_exit_2(capsys, two_state_file, circuit_file):
    code, _, err = run(capsys, "compose", two_state_file, circuit_file)
    assert code == 2
    assert "kind" in err


def test_tensor_and_dagger(capsys, two_state_file):
    code, out = assert_deterministic(capsys, "tensor", two_state_file,
                                     two_state_file)
    assert code == 0
    tensored = parse_network(out)
    assert len(tensored.network.nodes) == 4

    code, out = assert_deterministic(capsys, "dagger", two_state_file)
    assert code == 0
    doc = json.loads(out)
    assert doc["inputs"] == ["b"] and doc["outputs"] == ["a"]


def test_to_circuit_golden(capsys, two_state_file):
    code, out = assert_deterministic(capsys, "to-circuit", two_state_file)
    assert code == 0
    doc = json.loads(out)
    assert doc["kind"] == "circuit"
    assert [e["conductance"] for e in doc["edges"]] == [3.0, 3.0]


def test_to_circuit_wrong_kind_exit_2(capsys, circuit_file):
    code, _, err = run(capsys, "to-circuit", circuit_file)
    assert code == 2


def test_blackbox_equations_golden(capsys, two_state_file):
    code, out = assert_deterministic(capsys, "blackbox", two_state_file,
                                     "--equations")
    assert code == 0
    assert out == ("j_x1 = -3.0*p_x1 + 6.0*p_y1\n"
                   "j_y1 = -3.0*p_x1 + 6.0*p_y1\n")


def test_blackbox_json_round_trips(capsys, two_state_file):
    code, out = assert_deterministic(capsys, "blackbox", two_state_file)
    assert code == 0
    doc = json.loads(out)
    assert doc["source_dim"] == 2 and doc["target_dim"] == 2
    assert doc["port_populations"] == {"inputs": [2.0], "outputs": [1.0]}


def test_blackbox_plain_markov_exit_2(capsys, tmp_path):
    doc = json.loads(TWO_STATE)
    doc["kind"] = "markov"
    for node in doc["nodes"]:
        node.pop("population")
    path = tmp_path / "plain.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "blackbox", str(path))
    assert code == 2


def test_steady_state_golden(capsys, circuit_file):
    code, out = assert_deterministic(capsys, "steady-state", circuit_file,
                                     "--boundary", "a=1,c=0")
    assert code == 0
    assert out == '{\n  "a": 1.0,\n  "b": 0.5,\n  "c": 0.0\n}\n'


def test_steady_state_markov(capsys, two_state_file):
    code, out = assert_deterministic(capsys, "steady-state", two_state_file,
                                     "--boundary", "a=2,b=1")
    assert code == 0
    assert json.loads(out) == {"a": 2.0, "b": 1.0}


def test_steady_state_markov_path_internal_solve(capsys, tmp_path):
    # three-state chain, ends held at 1 and 0: the middle solves to 1/6
    doc = {
        "format_version": "1", "kind": "detailed_balanced_markov",
        "nodes": [{"id": "a", "population": 3.0},
                  {"id": "b", "population": 1.0},
                  {"id": "c", "population": 3.0}],
        "edges": [{"source": "a", "target": "b", "rate": 1.0},
                  {"source": "b", "target": "a", "rate": 3.0},
                  {"source": "b", "target": "c", "rate": 3.0},
                  {"source": "c", "target": "b", "rate": 1.0}],
        "inputs": ["a"], "outputs": ["c"],
    }
    path = tmp_path / "path.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "steady-state", str(path),
                       "--boundary", "a=1,c=0")
    assert code == 0
    values = json.loads(out)
    assert values["a"] == 1.0 and values["c"] == 0.0
    assert values["b"] == pytest.approx(1.0 / 6.0, abs=1e-12)


def test_simulate_csv_domain_too_short_exit_2(capsys, tmp_path):
    path = tmp_path / "net.json"
    path.write_text(TWO_STATE)
    csv_path = tmp_path / "short.csv"
    csv_path.write_text("t,a,b\n0.0,1.0,1.0\n0.5,1.0,1.0\n")
    code, _, err = run(capsys, "simulate", str(path),
                       "--boundary-csv", str(csv_path), "--t-end", "1.0")
    assert code == 2
    assert "does not cover" in err


def test_steady_state_missing_terminal_exit_2(capsys, circuit_file):
    code, _, err = run(capsys, "steady-state", circuit_file,
                       "--boundary", "a=1")
    assert code == 2
    assert "missing" in err


def test_flows_golden(capsys, two_state_file):
    code, out = assert_deterministic(capsys, "flows", two_state_file,
                                     "--boundary", "a=2,b=0")
    assert code == 0
    assert out == '{\n  "a": 6.0,\n  "b": -6.0\n}\n'


def test_flows_circuit(capsys, circuit_file):
    code, out = assert_deterministic(capsys, "flows", circuit_file,
                                     "--boundary", "a=1,c=0")
    assert code == 0
    assert json.loads(out) == {"a": 0.5, "c": -0.5}


def test_simulate_constant_boundary(capsys, tmp_path, circuit_file):
    doc = json.loads(TWO_STATE)
    path = tmp_path / "net.json"
    path.write_text(json.dumps(doc))
    out_path = tmp_path / "traj.csv"
    argv = ["simulate", str(path), "--boundary", "a=2,b=1",
            "--t-end", "0.01", "--dt", "0.001", "-o", str(out_path)]
    code, _, _ = run(capsys, *argv)
    assert code == 0
    first = out_path.read_bytes()
    run(capsys, *argv)
    assert out_path.read_bytes() == first
    lines = first.decode().splitlines()
    assert lines[0] == "t,a,b"
    assert len(lines) == 12


def test_simulate_csv_boundary(capsys, tmp_path):
    doc = json.loads(TWO_STATE)
    doc["nodes"].append({"id": "c", "population": 1.0})
    doc["edges"].append({"source": "b", "target": "c", "rate": 1.0})
    doc["edges"].append({"source": "c", "target": "b", "rate": 1.0})
    doc["outputs"] = ["c"]
    path = tmp_path / "chain.json"
    path.write_text(json.dumps(doc))
    csv_path = tmp_path / "boundary.csv"
    csv_path.write_text("t,a,c\n0.0,1.0,0.0\n1.0,2.0,0.5\n")
    code, out, _ = run(capsys, "simulate", str(path),
                       "--boundary-csv", str(csv_path),
                       "--p0", "b=0.5", "--t-end", "1.0", "--dt", "0.25")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,a,b,c"
    last = [float(x) for x in lines[-1].split(",")]
    assert last[0] == 1.0 and last[1] == 2.0 and last[3] == 0.5


def test_simulate_closed_network(capsys, tmp_path):
    doc = json.loads(TWO_STATE)
    doc["inputs"] = []
    doc["outputs"] = []
    path = tmp_path / "closed.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "simulate", str(path),
                       "--p0", "a=3,b=0", "--t-end", "1.0", "--dt", "0.01")
    assert code == 0
    assert out.splitlines()[0] == "t,a,b"


def test_simulate_rejects_extra_boundary(capsys, tmp_path):
    doc = json.loads(TWO_STATE)
    path = tmp_path / "net.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "simulate", str(path),
                       "--boundary", "a=1,b=1,z=1", "--t-end", "1.0")
    assert code == 2


def test_check_triangle_pass(capsys, two_state_file):
    code, out = assert_deterministic(capsys, "check-triangle", two_state_file)
    assert code == 0
    assert out.endswith("PASS\n")


def test_check_triangle_tiny_tol_fails(capsys, two_state_file):
    code, out, _ = run(capsys, "check-triangle", two_state_file,
                       "--tol", "1e-18")
    assert code == 3
    assert out.endswith("FAIL\n")


def test_check_lagrangian(capsys, two_state_file, circuit_file):
    code, out = assert_deterministic(capsys, "check-lagrangian",
                                     two_state_file)
    assert code == 0
    assert "PASS" in out
    code, out, _ = run(capsys, "check-lagrangian", circuit_file)
    assert code == 0


def test_dot_golden(capsys, two_state_file):
    code, out = assert_deterministic(capsys, "dot", two_state_file)
    assert code == 0
    assert out == (
        'digraph network {\n'
        '  rankdir=LR;\n'
        '  node [shape=circle];\n'
        '  "a" [label="a (q=2.0)"];\n'
        '  "b" [label="b (q=1.0)"];\n'
        '  "a" -> "b" [label="3.0"];\n'
        '  "b" -> "a" [label="6.0"];\n'
        '  "in1" [shape=plaintext, label="input 1"];\n'
        '  "in1" -> "a" [style=dashed, color=gray];\n'
        '  "out1" [shape=plaintext, label="output 1"];\n'
        '  "b" -> "out1" [style=dashed, color=gray];\n'
        '}\n')
