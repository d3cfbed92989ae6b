"""Command-line interface: ``mlsparse <subcommand> ...``.

Exit codes: 0 success, 1 computation failure, 2 invalid usage or input.
Every subcommand accepts ``--json`` for a machine-readable summary
carrying ``schema_version``.  Files are written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from itertools import combinations

from . import __version__
from ._io import atomic_write_text
from .distortion import parse_distortion
from .exceptions import DistortionError, GraphFormatError, MLSparseError
from .graph import dump_graph, load_graph
from .multilevel import (
    Quantizer,
    SparsifierKind,
    composite,
    dump_solution,
    dump_terminals,
    load_terminals,
    make_solver,
    ml_metric_closure_spanner,
    quantizer_profile,
    round_mlags,
)

SCHEMA_VERSION = 1


class UsageError(Exception):
    """Bad arguments or unreadable input; exit code 2."""


def _seed_default():
    raw = os.environ.get("MLSPARSE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"MLSPARSE_SEED must be an integer, got {raw!r}") from None


def _num(x):
    """JSON-friendly number: ints stay ints, rationals become ``"p/q"`` strings."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return x
    return str(x)


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _graph(path):
    try:
        return load_graph(_read(path))
    except GraphFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _ints(text, what):
    try:
        out = [int(s) for s in text.replace(";", ",").split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from None
    if not out:
        raise UsageError(f"{what}: empty list")
    return out


def _terminals(args, g):
    T = sorted(set(_ints(args.terminals, "--terminals")))
    missing = [v for v in T if v not in g]
    if missing:
        raise UsageError(f"terminals not in graph: {missing}")
    return T


def _pairs(text, g, terminals=None):
    if text == "all":
        pool = terminals if terminals else list(g.vertices)
        return list(combinations(sorted(pool), 2))
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        vals = _ints(chunk, "--pairs")
        if len(vals) != 2 or vals[0] == vals[1]:
            raise UsageError(f"--pairs: bad pair {chunk!r}")
        for v in vals:
            if v not in g:
                raise UsageError(f"--pairs: vertex {v} not in graph")
        out.append(tuple(sorted(vals)))
    if not out:
        raise UsageError("--pairs: no pairs given")
    return out


def _distortion(text):
    try:
        return parse_distortion(text)
    except DistortionError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, payload, text):
    """Print JSON when asked, otherwise the human-readable text."""
    if getattr(args, "json", False):
        payload = {"schema_version": SCHEMA_VERSION, "command": args.command, **payload}
        print(json.dumps(payload, sort_keys=True))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _edges_text(edges):
    return ",".join(f"{u}-{v}" for u, v in sorted(edges))


def _write(path, text):
    try:
        atomic_write_text(path, text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


# -- subcommands ----------------------------------------------------------------------


def cmd_gen(args):
    from .experiments import gen_er, sample_terminals

    seed = args.seed if args.seed is not None else _seed_default()
    if args.n < 3:
        raise UsageError("--n must be >= 3")
    g = gen_er(args.n, seed)
    text = dump_graph(g)
    payload = {"n": g.n, "m": g.m, "seed": seed, "weight": _num(g.total_weight())}
    if args.out:
        _write(args.out, text)
    if args.ell:
        h = sample_terminals(g, args.ell, seed)
        payload["terminal_sizes"] = list(h.sizes())
        if args.terminals_out:
            _write(args.terminals_out, dump_terminals(h))
    _emit(args, payload, text if not args.out else f"wrote {args.out} (n={g.n}, m={g.m})")
    return 0


def cmd_closure(args):
    from .steiner import metric_closure

    g = _graph(args.graph)
    T = _terminals(args, g)
    c = metric_closure(g, T)
    lines = []
    entries = []
    for u, v, w in c.graph.weighted_edges():
        path = c.pathmap[(u, v)]
        lines.append(f"{u} {v} {w} {_edges_text(path)}")
        entries.append({"u": u, "v": v, "d": _num(w), "path": [list(e) for e in path]})
    _emit(args, {"terminals": T, "edges": entries}, "\n".join(lines) if lines else "(no closure edges)")
    return 0


def cmd_spanner(args):
    from .spanners import subsetwise_spanner

    g = _graph(args.graph)
    T = _terminals(args, g)
    f = _distortion(args.f)
    res = subsetwise_spanner(g, T, f)
    if args.out:
        _write(args.out, dump_graph(res.edges.as_graph()))
    payload = {
        "edges": [list(e) for e in res.edges],
        "weight": _num(res.weight),
        "max_ratio": _num(res.max_ratio),
        "distortion": str(f),
    }
    _emit(args, payload, f"edges {_edges_text(res.edges)}\nweight {res.weight}\nmax_ratio {res.max_ratio}")
    return 0


def cmd_steiner(args):
    from .steiner import steiner_2approx, steiner_exact

    g = _graph(args.graph)
    T = _terminals(args, g)
    tree = steiner_exact(g, T) if args.exact else steiner_2approx(g, T)
    payload = {"edges": [list(e) for e in tree], "weight": _num(tree.weight), "exact": bool(args.exact)}
    _emit(args, payload, f"edges {_edges_text(tree)}\nweight {tree.weight}")
    return 0


def cmd_exact(args):
    from .exact import solve_exact

    g = _graph(args.graph)
    T = _terminals(args, g) if args.terminals else None
    P = _pairs(args.pairs, g, T)
    f = _distortion(args.f)
    out = solve_exact(g, P, f, backend=args.backend, unweighted=args.unweighted)
    payload = {"edges": [list(e) for e in out], "weight": _num(out.weight), "pairs": [list(p) for p in P]}
    _emit(args, payload, f"edges {_edges_text(out)}\nweight {out.weight}")
    return 0


def cmd_multilevel(args):
    from .exact import solve_exact_multilevel
    from .validation import check_level_cost

    g = _graph(args.graph)
    try:
        h = load_terminals(_read(args.terminals_file))
        h.check_graph(g)
        gfn = check_level_cost(args.g)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    kind = SparsifierKind.steiner() if args.kind == "steiner" else SparsifierKind.spanner(_distortion(args.f))
    payload = {"ell": h.ell, "kind": args.kind}
    if args.q_preset == "metric-closure":
        if kind.kind != "spanner":
            raise UsageError("metric-closure multilevel builds spanners only")
        sol = ml_metric_closure_spanner(g, h, kind.f)
        payload["stretch"] = {str(i): _num(r) for i, (_, r) in sol.meta["stretch"].items()}
    else:
        solver = make_solver(kind, args.subroutine)
        if args.q_preset == "composite":
            sol = composite(g, h, kind, solver, gfn)
            Q = Quantizer(sol.meta["Q"], h.ell)
        else:
            try:
                custom = _ints(args.q, "--q") if args.q else None
                Q = Quantizer.preset(args.q_preset, h.ell, custom)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            sol = round_mlags(g, h, Q, kind, solver)
        prof = quantizer_profile(gfn, Q)
        payload.update({"Q": list(Q.levels), "A": _num(prof.A), "B": _num(prof.B)})
    cost = sol.cost(gfn)
    payload["cost"] = _num(cost)
    payload["level_weights"] = [_num(w) for w in sol.weights()]
    text = [f"cost {cost}", "level_weights " + " ".join(str(w) for w in sol.weights())]
    if "Q" in payload:
        text.append(f"Q {','.join(map(str, payload['Q']))} A {payload['A']} B {payload['B']}")
    if args.optimum:
        opt = solve_exact_multilevel(g, h, kind.f, gfn).cost(gfn)
        payload["optimum"] = _num(opt)
        payload["ratio"] = float(Fraction(cost) / Fraction(opt))
        text.append(f"optimum {opt} ratio {payload['ratio']:.6f}")
    if args.out:
        _write(args.out, dump_solution(sol))
    _emit(args, payload, "\n".join(text))
    return 0


def cmd_ratio(args):
    from .ratio import composite_guarantee, format_value
    from .validation import check_level_cost

    if args.ell < 1:
        raise UsageError("--ell must be >= 1")
    try:
        gfn = check_level_cost(args.g)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ells = range(1, args.ell + 1) if args.table else [args.ell]
    rows = []
    for ell in ells:
        r = composite_guarantee(ell, gfn)
        rows.append((ell, r))
    csv_lines = ["ell,t,t_float,exact"] + [
        f"{ell},{format_value(r.t)},{float(r.t):.6f},{int(r.exact)}" for ell, r in rows
    ]
    csv_text = "\n".join(csv_lines) + "\n"
    if args.out:
        _write(args.out, csv_text)
    last = rows[-1][1]
    payload = {
        "ell": args.ell,
        "g": str(gfn),
        "t": _num(last.t),
        "t_float": float(last.t),
        "exact": last.exact,
        "worst_case": [_num(v) if last.exact else float(v) for v in last.y],
        "table": [{"ell": ell, "t": _num(r.t)} for ell, r in rows],
    }
    _emit(args, payload, csv_text if args.table else format_value(last.t))
    return 0


def cmd_experiment(args):
    from .experiments import ExperimentConfig, rows_to_csv, run_experiment

    seed = args.seed if args.seed is not None else _seed_default()
    try:
        cfg = ExperimentConfig(
            ns=_ints(args.n, "--n"),
            ells=_ints(args.ell, "--ell"),
            stretches=[s for s in args.t.split(",") if s],
            trials=args.trials,
            seed=seed,
            subroutines=tuple(s for s in args.subroutine.split(",") if s),
            mode=args.mode,
            record_timing=args.timing,
            jobs=args.jobs,
        )
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from None
    rows = run_experiment(cfg)
    text = rows_to_csv(rows)
    if args.out:
        _write(args.out, text)
    payload = {"rows": len(rows), "skipped": [list(c) for c in cfg.skipped()], "out": args.out}
    _emit(args, payload, text if not args.out else f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_plot(args):
    from .experiments import read_csv
    from .plotting import plot_csv

    try:
        rows = read_csv(_read(args.csv))
    except ValueError as exc:
        raise UsageError(f"{args.csv}: {exc}") from None
    try:
        plot_csv(rows, args.out, args.kind, args.by, args.metric, args.subroutine)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, {"out": args.out, "rows": len(rows)}, f"wrote {args.out}")
    return 0


def cmd_export_ilp(args):
    from .exact import build_ilp, export_lp

    g = _graph(args.graph)
    T = _terminals(args, g) if args.terminals else None
    P = _pairs(args.pairs, g, T)
    f = _distortion(args.f)
    model = build_ilp(g, P, f, unweighted=args.unweighted)
    export_lp(model, args.out)
    payload = {"out": args.out, "variables": model.n_variables, "constraints": len(model.constraints)}
    _emit(args, payload, f"wrote {args.out} ({model.n_variables} binaries, {len(model.constraints)} constraints)")
    return 0


# -- parser ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="mlsparse", description="Multi-level graph sparsifiers.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--json", action="store_true", help="print a JSON summary")
        sp.set_defaults(func=func)
        return sp

    sp = add("gen", cmd_gen, "generate a connected Erdos-Renyi graph with weights 1..10")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, help="default: $MLSPARSE_SEED or 0")
    sp.add_argument("--out", help="edge-list file (default: stdout)")
    sp.add_argument("--ell", type=int, help="also sample nested terminals with this many levels")
    sp.add_argument("--terminals-out", help="terminal file for --ell")

    sp = add("closure", cmd_closure, "metric closure over a terminal set")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--terminals", required=True, help="comma-separated vertex ids")

    sp = add("spanner", cmd_spanner, "subsetwise spanner via the metric closure")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--terminals", required=True)
    sp.add_argument("--f", default="x2", help="distortion: id, x<t>, +<b>, lin:<a>,<b>, table:...")
    sp.add_argument("--out", help="write the spanner as an edge list")

    sp = add("steiner", cmd_steiner, "Steiner tree (2-approximation or exact)")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--terminals", required=True)
    sp.add_argument("--exact", action="store_true")

    sp = add("exact", cmd_exact, "minimum pairwise spanner (exact)")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--pairs", default="all", help="'u,v;u,v' or 'all' (pairs of --terminals or of V)")
    sp.add_argument("--terminals")
    sp.add_argument("--f", default="id")
    sp.add_argument("--backend", choices=["bnb", "milp", "auto"], default="auto")
    sp.add_argument("--unweighted", action="store_true", help="minimize the edge count")

    sp = add("multilevel", cmd_multilevel, "multi-level sparsifier by rounding, composite or metric closure")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--terminals-file", required=True, help="lines 'v level'")
    sp.add_argument("--kind", choices=["spanner", "steiner"], default="spanner")
    sp.add_argument("--f", default="x2")
    sp.add_argument(
        "--q-preset", choices=["bu", "td", "powers2", "custom", "composite", "metric-closure"], default="composite"
    )
    sp.add_argument("--q", help="levels for --q-preset custom, e.g. 1,3")
    sp.add_argument("--subroutine", choices=["oracle", "metric-closure"], default="oracle")
    sp.add_argument("--g", default="linear", help="level cost: linear, constant or table:g1,g2,...")
    sp.add_argument("--optimum", action="store_true", help="also compute the exact optimum (small graphs)")
    sp.add_argument("--out", help="solution file (lines 'u v grade')")

    sp = add("ratio", cmd_ratio, "composite approximation guarantee t_ell")
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--g", default="linear")
    sp.add_argument("--table", action="store_true", help="CSV for ell = 1..N")
    sp.add_argument("--out", help="write the CSV table here")

    sp = add("experiment", cmd_experiment, "BU/TD/CMP comparison on random graphs")
    sp.add_argument("--n", default="6,8,10")
    sp.add_argument("--ell", default="2,3")
    sp.add_argument("--t", default="1.2,1.4,2,4")
    sp.add_argument("--trials", type=int, default=3)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--subroutine", default="oracle", help="oracle, metric-closure or both comma-separated")
    sp.add_argument("--mode", choices=["exact", "relative"], default="exact")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--timing", action="store_true", help="fill the ms_* columns")
    sp.add_argument("--out")

    sp = add("plot", cmd_plot, "SVG box or line plot of an experiment CSV")
    sp.add_argument("--csv", required=True)
    sp.add_argument("--kind", choices=["box", "line"], default="box")
    sp.add_argument("--by", choices=["n", "ell", "t"], default="ell")
    sp.add_argument("--metric", default="ratio_cmp")
    sp.add_argument("--subroutine")
    sp.add_argument("--out", required=True)

    sp = add("export-ilp", cmd_export_ilp, "write the pairwise spanner ILP in CPLEX LP format")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--pairs", default="all")
    sp.add_argument("--terminals")
    sp.add_argument("--f", default="id")
    sp.add_argument("--unweighted", action="store_true")
    sp.add_argument("--out", required=True)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mlsparse {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (MLSparseError, ValueError, RuntimeError, ArithmeticError, KeyError) as exc:
        print(f"mlsparse {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
