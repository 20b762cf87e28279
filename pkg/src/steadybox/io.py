"""JSON documents for networks and relations, CSV for trajectories.

The network document is the single wire format of the command line tool:

.. code-block:: json

    {
      "format_version": "1",
      "kind": "detailed_balanced_markov",
      "nodes": [{"id": "a", "population": 2.0}, {"id": "b", "population": 1.0}],
      "edges": [{"source": "a", "target": "b", "rate": 3.0},
                {"source": "b", "target": "a", "rate": 6.0}],
      "inputs": ["a"],
      "outputs": ["b"]
    }

Circuits label edges with ``conductance`` instead of ``rate`` and their
nodes carry no population.  Unknown fields are rejected; every diagnostic
carries a JSON-pointer path.  Floats are emitted with shortest round-trip
formatting (Python's default), so parse(emit(x)) reproduces x bit-exactly
and emitted documents are byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable

import numpy as np

from .blackbox import BoundaryBehavior
from .dynamics import BoundarySignal, Trajectory
from .linrel import LinearRelation, Subspace
from .network import (CIRCUIT, DETAILED_BALANCED, KINDS, Edge, Network,
                      OpenNetwork)

FORMAT_VERSION = "1"

_WEIGHT_KEY = {CIRCUIT: "conductance"}  # every other kind uses "rate"


class DocumentError(ValueError):
    """A document failed schema validation; carries pointer/message pairs."""

    def __init__(self, findings: Iterable[tuple[str, str]]):
        self.findings = tuple(findings)
        super().__init__("\n".join(f"{p}: {m}" for p, m in self.findings))


def _weight_key(kind: str) -> str:
    return _WEIGHT_KEY.get(kind, "rate")


def _check_keys(obj: dict, allowed: set[str], required: set[str],
                pointer: str, findings: list) -> None:
    for key in sorted(set(obj) - allowed):
        findings.append((f"{pointer}/{key}", "unknown field"))
    for key in sorted(required - set(obj)):
        findings.append((pointer, f"missing required field {key!r}"))


def _positive_number(value, pointer: str, findings: list) -> float | None:
    if not isinstance(value, (int, float)) or isinstance(value, bool) \
            or not math.isfinite(value) or value <= 0:
        findings.append(
            (pointer, f"expected a positive finite number, got {value!r}"))
        return None
    return float(value)


def document_to_network(doc) -> OpenNetwork:
    """Build an open network from a parsed document, or raise DocumentError."""
    findings: list[tuple[str, str]] = []
    if not isinstance(doc, dict):
        raise DocumentError([("", "document root must be an object")])
    _check_keys(doc, {"format_version", "kind", "nodes", "edges", "inputs",
                      "outputs"},
                {"format_version", "kind", "nodes", "edges", "inputs",
                 "outputs"}, "", findings)
    if findings:
        raise DocumentError(findings)
    if doc["format_version"] != FORMAT_VERSION:
        findings.append(("/format_version",
                         f"unsupported version {doc['format_version']!r}"))
    kind = doc["kind"]
    if kind not in KINDS:
        findings.append(("/kind", f"unknown kind {kind!r}"))
        raise DocumentError(findings)
    balanced = kind == DETAILED_BALANCED

    nodes: list[str] = []
    populations: dict[str, float] = {}
    if not isinstance(doc["nodes"], list):
        findings.append(("/nodes", "expected an array"))
        raise DocumentError(findings)
    for k, entry in enumerate(doc["nodes"]):
        ptr = f"/nodes/{k}"
        if not isinstance(entry, dict):
            findings.append((ptr, "expected an object"))
            continue
        allowed = {"id", "population"} if balanced else {"id"}
        required = {"id", "population"} if balanced else {"id"}
        _check_keys(entry, allowed, required, ptr, findings)
        node_id = entry.get("id")
        if not isinstance(node_id, str) or not node_id:
            findings.append((f"{ptr}/id", "node id must be a non-empty string"))
            continue
        if node_id in populations or node_id in nodes:
            findings.append((f"{ptr}/id", f"duplicate node id {node_id!r}"))
            continue
        nodes.append(node_id)
        if balanced and "population" in entry:
            q = _positive_number(entry["population"], f"{ptr}/population",
                                 findings)
            if q is not None:
                populations[node_id] = q

    weight_key = _weight_key(kind)
    edges: list[Edge] = []
    if not isinstance(doc["edges"], list):
        findings.append(("/edges", "expected an array"))
        raise DocumentError(findings)
    node_set = set(nodes)
    for k, entry in enumerate(doc["edges"]):
        ptr = f"/edges/{k}"
        if not isinstance(entry, dict):
            findings.append((ptr, "expected an object"))
            continue
        keys = {"source", "target", weight_key}
        _check_keys(entry, keys, keys, ptr, findings)
        ok = True
        for side in ("source", "target"):
            node_id = entry.get(side)
            if side in entry and node_id not in node_set:
                findings.append(
                    (f"{ptr}/{side}", f"unknown node {node_id!r}"))
                ok = False
        weight = None
        if weight_key in entry:
            weight = _positive_number(entry[weight_key],
                                      f"{ptr}/{weight_key}", findings)
        if ok and weight is not None and keys <= set(entry):
            edges.append(Edge(f"e{k}", entry["source"], entry["target"],
                              weight))

    ports: dict[str, tuple[str, ...]] = {}
    for side in ("inputs", "outputs"):
        entries = doc[side]
        if not isinstance(entries, list):
            findings.append((f"/{side}", "expected an array"))
            continue
        collected = []
        for k, node_id in enumerate(entries):
            if node_id not in node_set:
                findings.append(
                    (f"/{side}/{k}", f"unknown node {node_id!r}"))
            else:
                collected.append(node_id)
        ports[side] = tuple(collected)

    if findings:
        raise DocumentError(findings)
    net = Network(kind, tuple(nodes), tuple(edges),
                  populations if balanced else None)
    return OpenNetwork(net, ports["inputs"], ports["outputs"])


def parse_network(text: str) -> OpenNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError([("", f"invalid JSON: {exc}")]) from exc
    return document_to_network(doc)


def network_to_document(net: OpenNetwork) -> dict:
    g = net.network
    balanced = g.kind == DETAILED_BALANCED
    weight_key = _weight_key(g.kind)
    return {
        "format_version": FORMAT_VERSION,
        "kind": g.kind,
        "nodes": [
            {"id": n, "population": g.population(n)} if balanced
            else {"id": n}
            for n in g.nodes],
        "edges": [
            {"source": e.source, "target": e.target, weight_key: e.weight}
            for e in g.edges],
        "inputs": list(net.inputs),
        "outputs": list(net.outputs),
    }


def emit_network(net: OpenNetwork) -> str:
    return json.dumps(network_to_document(net), indent=2) + "\n"


def relation_to_document(relation: LinearRelation,
                         input_populations=None,
                         output_populations=None) -> dict:
    doc = {
        "source_dim": relation.source_dim,
        "target_dim": relation.target_dim,
        "basis": [[float(x) for x in vec] for vec in relation.space.basis.T],
    }
    if input_populations is not None or output_populations is not None:
        doc["port_populations"] = {
            "inputs": [float(x) for x in (input_populations or ())],
            "outputs": [float(x) for x in (output_populations or ())],
        }
    return doc


def behavior_to_document(behavior: BoundaryBehavior) -> dict:
    return relation_to_document(behavior.relation,
                                behavior.input_populations,
                                behavior.output_populations)


def document_to_relation(doc) -> tuple[LinearRelation, dict | None]:
    """Parse a relation document; returns the relation and port populations."""
    findings: list[tuple[str, str]] = []
    if not isinstance(doc, dict):
        raise DocumentError([("", "document root must be an object")])
    _check_keys(doc, {"source_dim", "target_dim", "basis",
                      "port_populations"},
                {"source_dim", "target_dim", "basis"}, "", findings)
    if findings:
        raise DocumentError(findings)
    source_dim, target_dim = doc["source_dim"], doc["target_dim"]
    for key, value in (("source_dim", source_dim),
                       ("target_dim", target_dim)):
        if not isinstance(value, int) or value < 0:
            findings.append((f"/{key}", "expected a non-negative integer"))
    if findings:
        raise DocumentError(findings)
    ambient = source_dim + target_dim
    basis = np.asarray(doc["basis"], dtype=float)
    if basis.size == 0:
        basis = np.zeros((0, ambient))
    if basis.ndim != 2 or basis.shape[1] != ambient:
        raise DocumentError(
            [("/basis", f"expected rows of length {ambient}")])
    try:
        space = Subspace(ambient, basis.T)
    except ValueError as exc:
        raise DocumentError([("/basis", str(exc))]) from exc
    return (LinearRelation(source_dim, target_dim, space),
            doc.get("port_populations"))


def emit_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def trajectory_to_csv(traj: Trajectory) -> str:
    return traj.to_csv()


def parse_boundary_csv(text: str) -> dict[str, BoundarySignal]:
    """Sampled boundary signals, one column per terminal, first column time."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows or len(rows) < 3:
        raise DocumentError(
            [("", "boundary CSV needs a header and at least two samples")])
    header = rows[0]
    if not header or header[0] != "t":
        raise DocumentError([("", "first CSV column must be 't'")])
    names = header[1:]
    try:
        data = np.array([[float(x) for x in row] for row in rows[1:]])
    except ValueError as exc:
        raise DocumentError([("", f"non-numeric CSV entry: {exc}")]) from exc
    if data.shape[1] != len(header):
        raise DocumentError([("", "ragged CSV rows")])
    times = data[:, 0]
    if not np.all(np.diff(times) > 0):
        raise DocumentError([("", "sample times must be strictly increasing")])
    return {name: BoundarySignal.sampled(times, data[:, k + 1])
            for k, name in enumerate(names)}
