"""Command-line entry point: ``envassist <command> [options]``.

Exit codes: 0 success, 2 usage error, 3 numerical-consistency failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__, acceptance, bayes, mc_verify, probe_opt
from .channel import INPUT_KINDS, ProbeConfig
from .errors import ClassificationError, DomainError, NumericalConsistencyError
from .gate_family import EDGES, get_edge

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

_PI_LITERAL = re.compile(r"^\s*(?:([0-9]*\.?[0-9]+)\s*\*\s*)?pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$", re.I)

TOLERANCES = {
    "cost": acceptance.TOL_COST,
    "optimizer_cost": acceptance.TOL_OPT,
    "oracle": acceptance.TOL_ORACLE,
    "singular_threshold": bayes.EPS_SINGULAR,
    "eigenvalue_range": bayes.EIG_RANGE_TOL,
    "residual": bayes.RESIDUAL_TOL,
    "probability": bayes.PROB_TOL,
}


def parse_angle(text: str) -> float:
    """Radians, or a multiple/fraction of pi such as ``pi/4`` or ``3*pi/2``."""
    m = _PI_LITERAL.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        if den == 0:
            raise argparse.ArgumentTypeError(f"zero denominator in {text!r}")
        return num * np.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r} (use radians or pi/N)") from None


def _edge_arg(text: str) -> str:
    try:
        return get_edge(text).id
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _complex_matrix(m: np.ndarray) -> dict:
    return {"real": np.real(m).tolist(), "imag": np.imag(m).tolist()}


def _probe_dict(c: ProbeConfig) -> dict:
    return {"x": c.x, "t": c.t, "phi1": c.phi1, "phi2": c.phi2}


def _envelope(args, results: dict, edge: str | None = None, inputs: dict | None = None) -> dict:
    return {
        "command": args.command,
        "edge": edge,
        "inputs": inputs or {},
        "results": results,
        "tolerances": TOLERANCES,
        "seed": getattr(args, "seed", None),
        "version": __version__,
    }


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, rows)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, value))


def _csv_value(v):
    return repr(v) if isinstance(v, float) else v


def _emit(args, payload: dict, rows: list[dict] | None = None, header: list[str] | None = None) -> None:
    fmt = args.format or ("csv" if rows is not None else "json")
    buf = io.StringIO()
    if fmt == "json":
        json.dump(payload, buf, indent=2)
        buf.write("\n")
    elif rows is not None:
        writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_value(v) for k, v in row.items()})
    else:
        flat: list = []
        _flatten("", payload, flat)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for k, v in flat:
            writer.writerow([k, _csv_value(v)])
    text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text, newline="")
    else:
        sys.stdout.write(text)


def _probe(args) -> ProbeConfig:
    return ProbeConfig(args.x, args.t, args.phi1, args.phi2)


def cmd_edges(args) -> int:
    rows = []
    for eid, e in EDGES.items():
        start, stop = e.endpoints
        fixed = ["pi/2" if np.isclose(v, np.pi / 2) else "0" if np.isclose(v, 0) else "alpha"
                 for v in (float(a) for a in e.angles(0.3))]
        rows.append({"edge": eid, "alpha_x": fixed[0], "alpha_y": fixed[1], "alpha_z": fixed[2],
                     "from": start, "to": stop, "description": e.description})
    _emit(args, _envelope(args, {"edges": rows}), rows if args.format == "csv" else None, list(rows[0]))
    return EXIT_OK


def cmd_solve(args) -> int:
    probe = _probe(args)
    sol = bayes.solve_theta(bayes.risk_moments(args.edge, probe, args.nodes, args.kind))
    povm = bayes.povm_from(sol)
    results = {
        "theta": _complex_matrix(sol.theta),
        "eigenvalues": sol.eigenvalues.tolist(),
        "eigenvectors": _complex_matrix(sol.eigenvectors),
        "povm": [{"estimate": est, "rank": int(round(np.trace(eff).real)), "effect": _complex_matrix(eff)}
                 for est, eff in povm.outcomes],
        "min_cost": sol.min_cost,
        "solver_case": sol.solver_case,
        "residual": sol.residual,
    }
    inputs = {**_probe_dict(probe), "nodes": args.nodes, "kind": args.kind}
    _emit(args, _envelope(args, results, args.edge, inputs))
    return EXIT_OK


def _grid(args) -> probe_opt.GridSpec:
    return probe_opt.GridSpec.regular(args.grid_xt, args.grid_phase)


def cmd_optimize(args) -> int:
    report = probe_opt.optimize_probe(args.edge, _grid(args), args.kind, args.nodes, workers=args.workers)
    inputs = {"grid_xt": args.grid_xt, "grid_phase": args.grid_phase, "nodes": args.nodes, "kind": args.kind}
    _emit(args, _envelope(args, report.to_dict(), args.edge, inputs))
    return EXIT_OK


def cmd_sweep(args) -> int:
    landscape = probe_opt.cost_landscape(args.edge, _grid(args), args.nodes, args.kind, args.workers)
    rows = [{**_probe_dict(c), "cost": cost} for c, cost in landscape]
    inputs = {"grid_xt": args.grid_xt, "grid_phase": args.grid_phase, "nodes": args.nodes, "kind": args.kind}
    _emit(args, _envelope(args, {"landscape": rows}, args.edge, inputs), rows, ["x", "t", "phi1", "phi2", "cost"])
    return EXIT_OK


def cmd_simulate(args) -> int:
    probe = _probe(args)
    if args.povm == "blind":
        povm = bayes.blind_povm()
    else:
        povm = bayes.povm_from(bayes.solve_theta(bayes.risk_moments(args.edge, probe, args.nodes, args.kind)))
    report = mc_verify.simulate_protocol(
        args.edge, probe, povm, args.trials, args.seed, args.povm, args.kind, args.workers
    )
    analytic = bayes.average_cost(povm, args.edge, probe, args.nodes, args.kind)
    results = {**report.to_dict(), "analytic_cost": analytic,
               "z_score": abs(report.empirical_cost - analytic) / report.standard_error
               if report.standard_error > 0 else 0.0}
    inputs = {**_probe_dict(probe), "trials": args.trials, "povm": args.povm, "kind": args.kind}
    _emit(args, _envelope(args, results, args.edge, inputs))
    return EXIT_OK


def cmd_validate(args) -> int:
    results = acceptance.run_all(seed=args.seed)
    for r in results:
        print(r.line(), file=sys.stderr if args.output or args.format == "json" else sys.stdout)
    if args.output or args.format == "json":
        payload = _envelope(args, {"criteria": [r.__dict__ for r in results]})
        _emit(args, payload)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


COMMANDS = {
    "edges": cmd_edges,
    "solve": cmd_solve,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="envassist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--output", "-o", default=None, help="write here instead of stdout")

    needs_edge = argparse.ArgumentParser(add_help=False)
    needs_edge.add_argument("--edge", required=True, type=_edge_arg, help="E1..E6")
    needs_edge.add_argument("--nodes", type=int, default=bayes.DEFAULT_NODES)
    needs_edge.add_argument("--kind", choices=INPUT_KINDS, default="standard", help="probe family")
    needs_edge.add_argument("--workers", type=int, default=1)

    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--x", type=float, required=True)
    probe.add_argument("--t", type=float, required=True)
    probe.add_argument("--phi1", type=parse_angle, default=0.0)
    probe.add_argument("--phi2", type=parse_angle, default=0.0)

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--grid-xt", type=int, default=21, help="points per axis in x and t")
    grid.add_argument("--grid-phase", type=int, default=4, help="points per phase")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("edges", parents=[common], help="list the six edges")
    sub.add_parser("solve", parents=[common, needs_edge, probe], help="optimal estimator for one input")
    sub.add_parser("optimize", parents=[common, needs_edge, grid], help="optimise the input for an edge")
    sub.add_parser("sweep", parents=[common, needs_edge, grid], help="cost landscape over the grid")
    sim = sub.add_parser("simulate", parents=[common, needs_edge, probe], help="Monte Carlo protocol run")
    sim.add_argument("--trials", type=int, default=1_000_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--povm", choices=("optimal", "blind"), default="optimal")
    val = sub.add_parser("validate", parents=[common], help="run every acceptance criterion")
    val.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    for name in ("nodes", "trials", "grid_xt", "grid_phase"):
        if getattr(args, name, 1) < 1:
            parser.error(f"--{name.replace('_', '-')} must be positive")
    try:
        return COMMANDS[args.command](args)
    except DomainError as exc:
        parser.print_usage(sys.stderr)
        print(f"envassist: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalConsistencyError, ClassificationError) as exc:
        print(f"envassist: numerical consistency failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
