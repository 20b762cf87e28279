"""Command line interface.

Exit codes: 0 success, 1 parse or schema failure, 2 violated precondition
(wrong kind, port mismatch, missing boundary data), 3 failed check.
Outputs are deterministic: identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import blackbox as bb
from . import dynamics, io as netio, network as netcore, variational
from .linrel import RANK_TOL
from .network import CIRCUIT, DETAILED_BALANCED

PARSE_ERROR, PRECONDITION_ERROR, CHECK_FAILED = 1, 2, 3


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def _load(path: str) -> netcore.OpenNetwork:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _CliError(PARSE_ERROR, f"{path}: {exc}") from exc
    return netio.parse_network(text)


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise _CliError(PRECONDITION_ERROR, f"{out}: {exc}") from exc


def _parse_assignments(spec: str, what: str) -> dict[str, float]:
    values: dict[str, float] = {}
    for item in spec.split(","):
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise _CliError(PRECONDITION_ERROR,
                            f"bad {what} entry {item!r}, expected name=value")
        try:
            values[key] = float(value)
        except ValueError as exc:
            raise _CliError(PRECONDITION_ERROR,
                            f"bad {what} value in {item!r}") from exc
    return values


def _boundary_vector(net: netcore.OpenNetwork, spec: str):
    values = _parse_assignments(spec, "boundary")
    missing = [t for t in net.terminals if t not in values]
    if missing:
        raise _CliError(PRECONDITION_ERROR,
                        f"boundary missing terminals: {missing}")
    extra = sorted(set(values) - set(net.terminals))
    if extra:
        raise _CliError(PRECONDITION_ERROR,
                        f"boundary names non-terminals: {extra}")
    return [values[t] for t in net.terminals]


def _format_mapping(names, values) -> str:
    lines = [f'  "{n}": {float(value)!r}' for n, value in zip(names, values)]
    return "{\n" + ",\n".join(lines) + "\n}\n" if lines else "{}\n"


def _behavior_of(net: netcore.OpenNetwork, rank_tol: float) -> bb.BoundaryBehavior:
    if net.kind == CIRCUIT:
        return bb.blackbox_circuit(net, rank_tol=rank_tol)
    if net.kind == DETAILED_BALANCED:
        return bb.blackbox_markov(net, rank_tol=rank_tol)
    raise _CliError(PRECONDITION_ERROR,
                    f"black boxing needs a circuit or detailed balanced "
                    f"network, got kind {net.kind!r}")


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot(net: netcore.OpenNetwork) -> str:
    g = net.network
    balanced = g.kind == DETAILED_BALANCED
    lines = ["digraph network {", "  rankdir=LR;", "  node [shape=circle];"]
    for n in g.nodes:
        label = f"{n} (q={g.population(n)!r})" if balanced else n
        lines.append(f"  {_quote(n)} [label={_quote(label)}];")
    for e in g.edges:
        lines.append(f"  {_quote(e.source)} -> {_quote(e.target)} "
                     f"[label={_quote(repr(e.weight))}];")
    for k, n in enumerate(net.inputs):
        port = f"in{k + 1}"
        lines.append(f"  {_quote(port)} [shape=plaintext, "
                     f"label={_quote('input ' + str(k + 1))}];")
        lines.append(f"  {_quote(port)} -> {_quote(n)} "
                     "[style=dashed, color=gray];")
    for k, n in enumerate(net.outputs):
        port = f"out{k + 1}"
        lines.append(f"  {_quote(port)} [shape=plaintext, "
                     f"label={_quote('output ' + str(k + 1))}];")
        lines.append(f"  {_quote(n)} -> {_quote(port)} "
                     "[style=dashed, color=gray];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steadybox",
        description="Compose, black-box, and simulate open Markov chains "
                    "and resistor circuits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, **kwargs):
        p = sub.add_parser(name, help=help_text, **kwargs)
        p.add_argument("file", help="network JSON document")
        return p

    p = add("validate", "check structural invariants and detailed balance")
    p.add_argument("--tol", type=float, default=netcore.DEFAULT_TOL)

    p = sub.add_parser("compose", help="glue outputs of A to inputs of B")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("-o", "--output")
    p.add_argument("--tol", type=float, default=netcore.DEFAULT_TOL)

    p = sub.add_parser("tensor", help="place two networks side by side")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("-o", "--output")

    p = add("dagger", "swap inputs and outputs")
    p.add_argument("-o", "--output")

    p = add("to-circuit", "equivalent circuit of a detailed balanced network")
    p.add_argument("-o", "--output")

    p = add("blackbox", "steady-state relation between the port data")
    p.add_argument("--equations", action="store_true",
                   help="print human-readable equations instead of JSON")
    p.add_argument("--rank-tol", type=float, default=RANK_TOL)

    p = add("steady-state", "steady populations or potentials")
    p.add_argument("--boundary", required=True,
                   help="comma-separated terminal=value pairs")

    p = add("flows", "boundary flows or currents in the steady state")
    p.add_argument("--boundary", required=True)

    p = add("simulate", "integrate the (open) master equation")
    p.add_argument("--boundary", help="constant terminal=value pairs")
    p.add_argument("--boundary-csv",
                   help="CSV time series: header t,<terminal ids>")
    p.add_argument("--p0", help="initial internal values as name=value pairs")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, default=dynamics.DEFAULT_DT)
    p.add_argument("-o", "--output")

    p = add("check-triangle",
            "compare direct and circuit-route behaviors")
    p.add_argument("--tol", type=float, default=1e-8)

    p = add("check-lagrangian", "check the behavior is Lagrangian")
    p.add_argument("--tol", type=float, default=1e-8)

    add("dot", "Graphviz rendering of the network")
    return parser


def _cmd_validate(args) -> int:
    net = _load(args.file)
    report = netcore.validate(net, tol=args.tol)
    if report.ok:
        print("ok")
        return 0
    for finding in report.findings:
        print(f"{finding.code}: {finding.message}")
    return CHECK_FAILED


def _cmd_compose(args) -> int:
    composed = netcore.compose(_load(args.first), _load(args.second),
                               tol=args.tol)
    _write(netio.emit_network(composed), args.output)
    return 0


def _cmd_tensor(args) -> int:
    _write(netio.emit_network(netcore.tensor(_load(args.first),
                                             _load(args.second))),
           args.output)
    return 0


def _cmd_dagger(args) -> int:
    _write(netio.emit_network(netcore.dagger(_load(args.file))), args.output)
    return 0


def _cmd_to_circuit(args) -> int:
    _write(netio.emit_network(bb.to_circuit(_load(args.file))), args.output)
    return 0


def _cmd_blackbox(args) -> int:
    behavior = _behavior_of(_load(args.file), args.rank_tol)
    if args.equations:
        for line in bb.behavior_equations(behavior):
            print(line)
    else:
        sys.stdout.write(netio.emit_json(netio.behavior_to_document(behavior)))
    return 0


def _cmd_steady_state(args) -> int:
    net = _load(args.file)
    boundary = _boundary_vector(net, args.boundary)
    if net.kind == CIRCUIT:
        values = variational.minimize_power(net, boundary)
    elif net.kind == DETAILED_BALANCED:
        values = variational.minimize_dissipation(net, boundary)
    else:
        raise _CliError(PRECONDITION_ERROR,
                        "steady-state needs a circuit or detailed balanced "
                        f"network, got kind {net.kind!r}")
    sys.stdout.write(_format_mapping(net.network.nodes, values))
    return 0


def _cmd_flows(args) -> int:
    net = _load(args.file)
    boundary = _boundary_vector(net, args.boundary)
    if net.kind == CIRCUIT:
        values = variational.boundary_current(net, boundary)
    elif net.kind == DETAILED_BALANCED:
        values = variational.boundary_flow(net, boundary)
    else:
        raise _CliError(PRECONDITION_ERROR,
                        "flows needs a circuit or detailed balanced "
                        f"network, got kind {net.kind!r}")
    sys.stdout.write(_format_mapping(net.terminals, values))
    return 0


def _cmd_simulate(args) -> int:
    net = _load(args.file)
    boundary: dict[str, object] = {}
    if args.boundary:
        boundary.update(_parse_assignments(args.boundary, "boundary"))
    if args.boundary_csv:
        try:
            text = Path(args.boundary_csv).read_text()
        except OSError as exc:
            raise _CliError(PARSE_ERROR, f"{args.boundary_csv}: {exc}")
        for name, signal in netio.parse_boundary_csv(text).items():
            if name in boundary:
                raise _CliError(PRECONDITION_ERROR,
                                f"terminal {name!r} given both constant and "
                                "CSV boundary data")
            boundary[name] = signal
    p0 = {n: 0.0 for n in net.internal_nodes}
    if args.p0:
        for name, value in _parse_assignments(args.p0, "p0").items():
            if name not in p0:
                raise _CliError(PRECONDITION_ERROR,
                                f"--p0 names non-internal node {name!r}")
            p0[name] = value
    if net.terminals:
        traj = dynamics.integrate_open(net, boundary, p0, args.t_end,
                                       args.dt)
    else:
        if boundary:
            raise _CliError(PRECONDITION_ERROR,
                            "closed network: no boundary data expected")
        full = {n: 0.0 for n in net.network.nodes}
        if args.p0:
            full.update(_parse_assignments(args.p0, "p0"))
        traj = dynamics.integrate_closed(net.network, full, args.t_end,
                                         args.dt)
    for message in traj.warnings:
        print(f"warning: {message}", file=sys.stderr)
    _write(traj.to_csv(), args.output)
    return 0


def _cmd_check_triangle(args) -> int:
    net = _load(args.file)
    if net.kind != DETAILED_BALANCED:
        raise _CliError(PRECONDITION_ERROR,
                        "check-triangle needs a detailed balanced network, "
                        f"got kind {net.kind!r}")
    report = bb.check_triangle(net, tol=args.tol)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"triangle distance {report.distance!r} (tol {report.tol!r}): "
          f"{verdict}")
    return 0 if report.passed else CHECK_FAILED


def _cmd_check_lagrangian(args) -> int:
    net = _load(args.file)
    behavior = _behavior_of(net, RANK_TOL)
    ok = bb.check_lagrangian_behavior(behavior, tol=args.tol)
    print(f"lagrangian (dimension {behavior.relation.dim} in ambient "
          f"{behavior.relation.space.ambient_dim}): "
          f"{'PASS' if ok else 'FAIL'}")
    return 0 if ok else CHECK_FAILED


def _cmd_dot(args) -> int:
    sys.stdout.write(_dot(_load(args.file)))
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "compose": _cmd_compose,
    "tensor": _cmd_tensor,
    "dagger": _cmd_dagger,
    "to-circuit": _cmd_to_circuit,
    "blackbox": _cmd_blackbox,
    "steady-state": _cmd_steady_state,
    "flows": _cmd_flows,
    "simulate": _cmd_simulate,
    "check-triangle": _cmd_check_triangle,
    "check-lagrangian": _cmd_check_lagrangian,
    "dot": _cmd_dot,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except netio.DocumentError as exc:
        for pointer, message in exc.findings:
            print(f"{pointer or '/'}: {message}", file=sys.stderr)
        return PARSE_ERROR
    except _CliError as exc:
        print(exc.message, file=sys.stderr)
        return exc.code
    except (netcore.NetworkError, dynamics.DynamicsError) as exc:
        print(str(exc), file=sys.stderr)
        return PRECONDITION_ERROR


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
