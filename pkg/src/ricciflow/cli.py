"""Command-line front end.

Subcommands: curvature, spectrum, classify, flow, inverse, reproduce.
All outputs are CSV/JSON data files written atomically under --out; floats
are formatted to 12 significant digits so identical configs produce
byte-identical files.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .curvature import (
    DegenerateMetric,
    EpsilonTooLarge,
    default_epsilon,
    forman_edge,
    lly_edge,
    lly_limit_estimate,
)
from .flow import (
    StepSizeTooLarge,
    forman_flow_exact,
    lly_flow_integrate,
    normalized_trajectory,
    write_surgery_csv,
    write_trajectory_csv,
)
from .graph import (
    GraphError,
    MeasuredGraph,
    MetricAssignment,
    build_named_graph,
    edge_key,
    is_tree,
    load_graph,
    surgery_scan,
)
from .spectral import (
    ConvergenceFailure,
    DEFAULT_TOL_ZERO,
    build_flow_matrix,
    classify_convergence,
    classify_tree_uniform,
    curvature_bounds,
    eigendecompose,
    inverse_curvature,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

FMT = "{:.12g}"

FIGURE2_EDGES = ((1, 5), (2, 5), (3, 4), (4, 5), (5, 6), (6, 7), (6, 8))
FIGURE_IDS = ("fig1a", "fig1b", "fig1c", "fig1d", "fig2", "ex42", "ex43")


class InputError(Exception):
    pass


def _fnum(x):
    # round-trip through 12 significant digits for diff-stable output
    return float(FMT.format(float(x)))


def _atomic_write(path, text):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _edge_id(u, v):
    return f"{u}-{v}"


def _parse_floats(text, what):
    try:
        return [float(p) for p in text.split(",") if p.strip() != ""]
    except ValueError as exc:
        raise InputError(f"bad {what} list: {text!r}") from exc


def _resolve_graph(args):
    """Build (graph, omega0, name) from --named or --input."""
    if bool(args.named) == bool(args.input):
        raise InputError("exactly one of --named or --input is required")
    omega0 = None
    if args.named:
        try:
            family, _, count = args.named.partition(":")
            n = int(count)
        except ValueError as exc:
            raise InputError(f"bad --named spec {args.named!r}") from exc
        m2_values = _parse_floats(args.m2, "--m2") if args.m2 else None
        mode = "uniform" if args.measure == "uniform" else "normalized_deg1"
        try:
            g = build_named_graph(family, n, measure_mode=mode, m2_values=m2_values)
        except GraphError as exc:
            raise InputError(str(exc)) from exc
        name = f"{family}{n}"
    else:
        if args.m2:
            raise InputError("--m2 only applies to --named graphs")
        try:
            g, omega0 = load_graph(args.input)
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc}") from exc
        except GraphError as exc:
            raise InputError(str(exc)) from exc
        name = os.path.splitext(os.path.basename(args.input))[0]
    if args.omega0:
        vals = _parse_floats(args.omega0, "--omega0")
        if len(vals) != g.n_edges:
            raise InputError(
                f"--omega0 needs {g.n_edges} values, got {len(vals)}"
            )
        if any(v <= 0 for v in vals):
            raise InputError("--omega0 values must be positive")
        omega0 = MetricAssignment.from_vector(g, vals)
    if omega0 is None:
        omega0 = MetricAssignment.uniform(g)
    return g, omega0, name


def _tol_zero(args):
    env = os.environ.get("RICCI_TOL_ZERO")
    if args.tol_zero is not None:
        return args.tol_zero
    if env is not None:
        try:
            return float(env)
        except ValueError as exc:
            raise InputError(f"bad RICCI_TOL_ZERO value {env!r}") from exc
    return DEFAULT_TOL_ZERO


def cmd_curvature(args):
    g, omega, name = _resolve_graph(args)
    bad = surgery_scan(g, omega)
    if bad:
        raise DegenerateMetric(
            f"metric is degenerate on edges {[_edge_id(*e) for e in bad]}"
        )
    eps = args.epsilon if args.epsilon is not None else default_epsilon(g)
    lines = ["edge,forman,lly,lly_limit_estimate"]
    for u, v in g.edges:
        lines.append(
            ",".join(
                [
                    _edge_id(u, v),
                    FMT.format(forman_edge(g, omega, (u, v))),
                    FMT.format(lly_edge(g, omega, (u, v))),
                    FMT.format(lly_limit_estimate(g, omega, (u, v), eps)),
                ]
            )
        )
    out = os.path.join(args.out, f"curvature_{name}.csv")
    _atomic_write(out, "\n".join(lines) + "\n")
    print(out)
    return EXIT_OK


def _spectrum_payload(g):
    fm = build_flow_matrix(g)
    sd = eigendecompose(fm)
    lower, upper = curvature_bounds(g)
    return {
        "eigenvalues": [_fnum(x) for x in sd.eigenvalues],
        "lambda_max": _fnum(sd.lambda_max),
        "perron_vector": {
            _edge_id(u, v): _fnum(sd.perron_vector[i])
            for i, (u, v) in enumerate(g.edges)
        },
        "bounds": {"lower": _fnum(lower), "upper": _fnum(upper)},
    }


def cmd_spectrum(args):
    g, _, name = _resolve_graph(args)
    out = os.path.join(args.out, f"spectrum_{name}.json")
    _write_json(out, _spectrum_payload(g))
    print(out)
    return EXIT_OK


def _classify_payload(g, omega0, tol_zero):
    report = classify_convergence(g, omega0, tol_zero=tol_zero)
    payload = {
        "classification": report.classification,
        "lambda_max": _fnum(report.lambda_max),
        "limiting_curvature": _fnum(report.limiting_curvature),
        "limiting_normalized_metric": {
            _edge_id(u, v): _fnum(report.limiting_normalized_metric[edge_key(u, v)])
            for u, v in g.edges
        },
        "bounds": {
            "lower": _fnum(report.bounds[0]),
            "upper": _fnum(report.bounds[1]),
        },
    }
    uniform = all(g.m1[x] == 1.0 for x in g.vertices) and all(
        m == 1.0 for m in g.m2.values()
    )
    if is_tree(g) and uniform:
        payload["tree_case"] = classify_tree_uniform(g)
    return payload


def cmd_classify(args):
    g, omega0, name = _resolve_graph(args)
    out = os.path.join(args.out, f"classify_{name}.json")
    _write_json(out, _classify_payload(g, omega0, _tol_zero(args)))
    print(out)
    return EXIT_OK


def cmd_flow(args):
    g, omega0, name = _resolve_graph(args)
    if args.t_end < 0:
        raise InputError("--t-end must be nonnegative")
    if args.dt <= 0:
        raise InputError("--dt must be positive")
    if args.kind == "forman":
        steps = max(1, int(round(args.t_end / args.dt)))
        times = [i * args.t_end / steps for i in range(steps + 1)]
        traj = forman_flow_exact(g, omega0, times)
    else:
        traj = lly_flow_integrate(
            g, omega0, args.t_end, args.dt, surgery=args.surgery
        )
    out = os.path.join(args.out, f"flow_{name}.csv")
    write_trajectory_csv(traj, traj.final_graph(), out)
    print(out)
    if traj.surgeries:
        sout = os.path.join(args.out, f"flow_{name}_surgery.csv")
        write_surgery_csv(traj, sout)
        print(sout)
    return EXIT_OK


def cmd_inverse(args):
    g, _, name = _resolve_graph(args)
    vals = _parse_floats(args.kappa, "--kappa")
    if len(vals) != g.n_edges:
        raise InputError(f"--kappa needs {g.n_edges} values, got {len(vals)}")
    kappa = {edge_key(u, v): vals[i] for i, (u, v) in enumerate(g.edges)}
    result = inverse_curvature(g, kappa, tol=args.tol)
    payload = {"lambda_max_K": _fnum(result.lambda_max)}
    if result.metric is None:
        payload["solvable"] = False
    else:
        payload["solvable"] = True
        payload["omega"] = {
            _edge_id(u, v): _fnum(result.metric.weights[edge_key(u, v)])
            for u, v in g.edges
        }
    out = os.path.join(args.out, f"inverse_{name}.json")
    _write_json(out, payload)
    print(out)
    return EXIT_OK


def figure2_graph():
    """The 8-vertex, maximum-degree-4 tree used in the simulation figure."""
    vertices = tuple(range(1, 9))
    m1 = {x: 1.0 for x in vertices}
    m2 = {edge_key(u, v): 1.0 for u, v in FIGURE2_EDGES}
    return MeasuredGraph(vertices, FIGURE2_EDGES, m1, m2)


def figure2_initial_metric(g, delta):
    """Weights 1/7 +/- delta, sign alternating along the edge order."""
    base = 1.0 / 7.0
    vals = [base + ((1 if i % 2 == 0 else -1) * delta) for i in range(g.n_edges)]
    return MetricAssignment.from_vector(g, vals)


def _reproduce_flow(g, omega0, name, out_dir, t_end=12.0, dt=0.01):
    steps = int(round(t_end / dt))
    times = [i * dt for i in range(steps + 1)]
    traj = normalized_trajectory(forman_flow_exact(g, omega0, times))
    csv_path = os.path.join(out_dir, f"reproduce_{name}.csv")
    write_trajectory_csv(traj, g, csv_path)
    report = classify_convergence(g, omega0)
    summary = {
        "classification": report.classification,
        "lambda_max": _fnum(report.lambda_max),
        "limiting_curvature": _fnum(report.limiting_curvature),
        "limiting_normalized_metric": {
            _edge_id(u, v): _fnum(report.limiting_normalized_metric[edge_key(u, v)])
            for u, v in g.edges
        },
    }
    return csv_path, summary


def cmd_reproduce(args):
    out_dir = args.out
    written = []
    fig = args.figure
    if fig == "fig1a":
        g = build_named_graph("star", 3, "uniform")
        csv_path, summary = _reproduce_flow(g, MetricAssignment.uniform(g), fig, out_dir)
    elif fig == "fig1b":
        g = build_named_graph("star", 3, "normalized_deg1", m2_values=[1.0, 2.0, 3.0])
        csv_path, summary = _reproduce_flow(g, MetricAssignment.uniform(g), fig, out_dir)
    elif fig == "fig1c":
        g = build_named_graph("star", 6, "uniform")
        csv_path, summary = _reproduce_flow(g, MetricAssignment.uniform(g), fig, out_dir)
    elif fig == "fig1d":
        g = build_named_graph("star", 6, "normalized_deg1", m2_values=[1.0] * 6)
        csv_path, summary = _reproduce_flow(g, MetricAssignment.uniform(g), fig, out_dir)
    elif fig == "fig2":
        g = figure2_graph()
        summary = {"deltas": {}}
        csv_path = None
        for delta in (0.0, 0.01, 0.02, 0.03):
            name = f"fig2_delta{FMT.format(delta)}"
            omega0 = figure2_initial_metric(g, delta)
            csv_path, sub = _reproduce_flow(g, omega0, name, out_dir)
            written.append(csv_path)
            summary["deltas"][FMT.format(delta)] = sub
        csv_path = None
    elif fig in ("ex42", "ex43"):
        family = "path" if fig == "ex42" else "star"
        n = 10
        a = [float(i) for i in range(1, n + 1)]
        g = build_named_graph(family, n, "normalized_deg1", m2_values=a)
        summary = _spectrum_payload(g)
        summary["m2_values"] = [_fnum(x) for x in a]
        csv_path = None
    else:
        raise InputError(f"unknown figure id {fig!r}")

    if csv_path:
        written.append(csv_path)
    json_path = os.path.join(out_dir, f"reproduce_{fig}.json")
    _write_json(json_path, summary)
    written.append(json_path)
    for p in written:
        print(p)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ricciflow",
        description="Discrete Ricci curvature and curvature flows on measured graphs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_graph_options(p):
        p.add_argument("--named", help="named graph, e.g. path:5, star:3, cycle:5")
        p.add_argument("--input", help="graph file path")
        p.add_argument(
            "--measure",
            choices=("uniform", "normalized"),
            default="uniform",
            help="measure mode for --named graphs",
        )
        p.add_argument("--m2", help="comma-separated m2 values (normalized mode)")
        p.add_argument("--omega0", help="comma-separated initial edge weights")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("curvature", help="per-edge Forman/LLY curvature table")
    add_graph_options(p)
    p.add_argument("--epsilon", type=float, help="laziness for the transport estimate")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("spectrum", help="eigenvalues of the symmetrized flow matrix")
    add_graph_options(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("classify", help="long-time convergence report")
    add_graph_options(p)
    p.add_argument("--tol-zero", type=float, help="tolerance for the zero class")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("flow", help="evolve a curvature flow, export trajectory CSV")
    add_graph_options(p)
    p.add_argument("--kind", choices=("forman", "lly"), default="forman")
    p.add_argument("--t-end", type=float, default=5.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--surgery", action="store_true", default=True)
    p.add_argument("--no-surgery", dest="surgery", action="store_false")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("inverse", help="prescribed-curvature problem")
    add_graph_options(p)
    p.add_argument("--kappa", required=True, help="comma-separated target curvatures")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL_ZERO)
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("reproduce", help="regenerate simulation/example data files")
    p.add_argument("--figure", choices=FIGURE_IDS, required=True)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "out"):
            os.makedirs(args.out, exist_ok=True)
        return args.func(args)
    except (InputError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (
        DegenerateMetric,
        EpsilonTooLarge,
        ConvergenceFailure,
        StepSizeTooLarge,
        RuntimeError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
