"""Command-line interface.

Exit codes: 0 when the command and all requested checks succeed, 1 when a
requested property or check fails, 2 for usage, parse and I/O errors.
Text output is for humans; JSON output is the stable surface.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .archgraph import build_graph, direct_propagation_check, export, structural_equal
from .builtins import BUILTIN_NAMES, builtin_spec
from .errors import RecurError
from .expansion import (
    DEFAULT_DEPTH_CAP,
    check_structure,
    derivative,
    unroll,
    value_equivalence_report,
    verify_chain_identity,
)
from .numeric import check_derivative, finite_diff_check, instantiate
from .parser import ArchitectureSpec, parse_file, render
from .stats import (
    fixture_table,
    friedman,
    friedman_graph_data,
    load_table,
    nemenyi,
    rank,
)

FIXTURE_NAMES = ("table1", "table2")


def depth_cap() -> int:
    raw = os.environ.get("RECUR_DEPTH_CAP")
    if raw is None:
        return DEFAULT_DEPTH_CAP
    try:
        return int(raw)
    except ValueError:
        raise RecurError(f"RECUR_DEPTH_CAP must be an integer, got {raw!r}") from None


def _resolve_spec(args) -> ArchitectureSpec:
    if getattr(args, "builtin", None):
        return builtin_spec(args.builtin)
    path = getattr(args, "spec", None)
    if path is None:
        raise RecurError("provide a spec file or --builtin NAME")
    return _load_spec_arg(path)


def _load_spec_arg(token: str) -> ArchitectureSpec:
    """A spec argument is a file path, or a builtin name if no such file."""
    if Path(token).exists():
        return parse_file(token)
    if token in BUILTIN_NAMES:
        return builtin_spec(token)
    raise RecurError(f"no file {token!r} and no builtin of that name")


def _emit(text: str, args) -> None:
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_parse(args) -> int:
    spec = _resolve_spec(args)
    canonical = render(spec)
    if args.format == "json":
        payload = {
            "name": spec.name,
            "index_var": spec.rule.index_var,
            "first_rule_index": spec.first_rule_index,
            "canonical": canonical,
        }
        _emit(_json_text(payload), args)
    else:
        _emit(canonical, args)
    return 0


def cmd_expand(args) -> int:
    spec = _resolve_spec(args)
    expansion = unroll(spec, args.depth, depth_cap())
    if args.format == "json":
        payload = {
            "spec": spec.name,
            "depth": args.depth,
            "components": [
                {
                    "state": j,
                    "polynomial": str(poly),
                    "terms": [
                        {"coeff": t.coeff, "factors": list(t.factors)}
                        for t in poly.terms()
                    ],
                }
                for j, poly in expansion.components.items()
            ],
        }
        _emit(_json_text(payload), args)
    else:
        _emit(f"X[{args.depth}] = {expansion}\n", args)
    return 0


def cmd_census(args) -> int:
    from .algebra import census

    spec = _resolve_spec(args)
    poly = derivative(spec, args.depth, args.wrt, depth_cap())
    histogram = census(poly)
    report = None
    if args.check:
        report = check_structure(poly, args.check, args.depth, args.wrt, spec.name)

    if args.format == "json":
        payload = {
            "spec": spec.name,
            "depth": args.depth,
            "wrt": args.wrt,
            "census": {
                str(k): {"count": b.count, "weight": b.weight}
                for k, b in histogram.items()
            },
            "check": report.to_dict() if report else None,
        }
        _emit(_json_text(payload), args)
    else:
        lines = [f"spec: {spec.name}  depth: {args.depth}  wrt: {args.wrt}"]
        body = ", ".join(f"{k}: {b.count}" for k, b in histogram.items())
        lines.append(f"census {{{body}}}")
        if report:
            lines.append(f"check {args.check}: {'PASS' if report.passed else 'FAIL'}")
            for v in report.violations:
                lines.append(
                    f"  length {v.length}: expected {v.expected}, got {v.actual}"
                )
        _emit("\n".join(lines) + "\n", args)
    if report and not report.passed:
        return 1
    return 0


def cmd_equiv(args) -> int:
    spec_a = _load_spec_arg(args.spec_a)
    spec_b = _load_spec_arg(args.spec_b)
    cap = depth_cap()
    report = value_equivalence_report(spec_a, spec_b, args.depth, cap)
    reports = [report.to_dict()]
    failed = not report.passed
    lines = [
        f"value equivalence at depth {args.depth}:"
        f" {'equivalent' if report.passed else 'NOT equivalent'}"
    ]
    for v in report.violations[:10]:
        lines.append(f"  length {v.length}: {v.expected} vs {v.actual}")

    if args.structural:
        iso = structural_equal(
            build_graph(spec_a, args.depth), build_graph(spec_b, args.depth)
        )
        reports.append(
            {
                "spec": f"{spec_a.name} vs {spec_b.name}",
                "depth": args.depth,
                "wrt": None,
                "check": "structural-equality",
                "pass": iso,
                "violations": [],
            }
        )
        lines.append(f"structural equality: {'isomorphic' if iso else 'NOT isomorphic'}")
        failed = failed or not iso

    if args.format == "json":
        _emit(_json_text(reports), args)
    else:
        _emit("\n".join(lines) + "\n", args)
    return 1 if failed else 0


def cmd_graph(args) -> int:
    spec = _resolve_spec(args)
    graph = build_graph(spec, args.depth)
    if args.propagation:
        report = direct_propagation_check(graph)
        if args.format == "json":
            _emit(_json_text(report.to_dict()), args)
        else:
            lines = [f"graph: {graph.name}  depth: {graph.depth}"]
            for entry in report.entries:
                cross = (
                    f"; cross-layer identity from {list(entry.cross_layer_sources)}"
                    if entry.cross_layer_sources
                    else ""
                )
                lines.append(
                    f"  X[{entry.prev}] -> X[{entry.cur}]:"
                    f" direct identity {'yes' if entry.has_direct_identity else 'no'}"
                    + cross
                )
            lines.append(f"all pairs direct: {'yes' if report.all_direct else 'no'}")
            _emit("\n".join(lines) + "\n", args)
        return 0
    fmt = "json" if args.format == "json" else "dot"
    _emit(export(graph, fmt), args)
    return 0


def cmd_verify(args) -> int:
    spec = _resolve_spec(args)
    L, d = args.depth, args.dim
    cap = depth_cap()
    seeds = [args.seed + t for t in range(args.seeds)]
    results = []
    if args.activation == "tanh":
        wrts = [args.wrt] if args.wrt is not None else list(range(0, L))
        for seed in seeds:
            net = instantiate(spec, L, d, seed, activation="tanh")
            for j in wrts:
                results.append(
                    finite_diff_check(net, j, epsilon=args.eps, tol=args.fd_tol)
                )
    else:
        wrts = [args.wrt] if args.wrt is not None else list(range(0, L + 1))
        for seed in seeds:
            net = instantiate(spec, L, d, seed)
            for j in wrts:
                poly = derivative(spec, L, j, cap)
                results.append(check_derivative(net, poly, j, tol=args.tol))

    all_pass = all(r.passed for r in results)
    if args.format == "json":
        payload = {"checks": [r.to_dict() for r in results], "pass": all_pass}
        _emit(_json_text(payload), args)
    else:
        lines = []
        for r in results:
            lines.append(
                f"{r.spec} L={r.L} j={r.j} d={r.d} seed={r.seed}"
                f" activation={r.activation or 'none'}"
                f" error={r.error:.3e} tol={r.tol:.0e}"
                f" {'ok' if r.passed else 'FAIL'}"
            )
        lines.append(
            f"{len(results)} checks, {sum(r.passed for r in results)} passed"
        )
        _emit("\n".join(lines) + "\n", args)
    return 0 if all_pass else 1


def cmd_chain_identity(args) -> int:
    spec = _resolve_spec(args)
    cap = depth_cap()
    outcomes = {m: verify_chain_identity(spec, m, cap) for m in range(2, args.depth + 1)}
    all_pass = all(outcomes.values())
    if args.format == "json":
        payload = {
            "spec": spec.name,
            "results": [{"m": m, "holds": ok} for m, ok in outcomes.items()],
            "pass": all_pass,
        }
        _emit(_json_text(payload), args)
    else:
        lines = [
            f"m={m}: {'holds' if ok else 'FAILS'}" for m, ok in outcomes.items()
        ]
        lines.append(f"chain-rule identity: {'PASS' if all_pass else 'FAIL'}")
        _emit("\n".join(lines) + "\n", args)
    return 0 if all_pass else 1


def cmd_stats(args) -> int:
    token = args.table
    if Path(token).exists():
        table = load_table(token)
    elif token in FIXTURE_NAMES:
        table = fixture_table(token)
    else:
        raise RecurError(f"no file {token!r} and no fixture of that name")

    ranks = rank(table)
    fried = friedman(ranks)
    nem = nemenyi(ranks, args.alpha)
    graph_data = friedman_graph_data(ranks, nem)

    if args.graph_json:
        Path(args.graph_json).write_text(
            _json_text(graph_data.to_dict()), encoding="utf-8"
        )

    if args.format == "json":
        payload = {
            "ranks": ranks.to_dict(),
            "friedman": fried.to_dict(),
            "nemenyi": nem.to_dict(),
            "graph": graph_data.to_dict(),
        }
        _emit(_json_text(payload), args)
    else:
        lines = [f"methods: {ranks.k}  datasets: {ranks.n}"]
        for method, mean, lo, hi in graph_data.entries:
            lines.append(f"  {method}: mean rank {mean:.4g}  [{lo:.4g}, {hi:.4g}]")
        lines.append(
            f"tau_chi2 = {fried.tau_chi2:.6g}  tau_F = {fried.tau_f:.6g}"
            f"  df = ({fried.df1}, {fried.df2})"
        )
        if fried.p_value is not None:
            lines.append(f"p = {fried.p_value:.6g}")
        lines.append(f"CD = {nem.cd:.6g} (alpha = {args.alpha}, q = {nem.q_alpha})")
        significant = [
            f"{nem.methods[a]} vs {nem.methods[b]}"
            for a in range(ranks.k)
            for b in range(a + 1, ranks.k)
            if not nem.overlap[a][b]
        ]
        if significant:
            lines.append("significantly different: " + "; ".join(significant))
        else:
            lines.append("no significantly different pairs")
        _emit("\n".join(lines) + "\n", args)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_spec_arguments(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("spec", nargs="?", help="path to a .rf formula file")
    sub.add_argument(
        "--builtin",
        choices=BUILTIN_NAMES,
        help="use a named built-in formula instead of a file",
    )


def _add_common(sub: argparse.ArgumentParser, fmt_choices=("text", "json")) -> None:
    sub.add_argument("--format", choices=fmt_choices, default=fmt_choices[0])
    sub.add_argument("--out", help="write output to this file instead of stdout")


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recur",
        description="recursion-formula architecture toolkit",
    )
    parser.add_argument("--version", action="version", version=f"recur {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("parse", help="parse a formula and print its canonical form")
    _add_spec_arguments(p)
    _add_common(p)
    p.set_defaults(func=cmd_parse)

    p = subs.add_parser("expand", help="unroll X[L] over the free input states")
    _add_spec_arguments(p)
    p.add_argument("--depth", "-L", type=int, default=6)
    _add_common(p)
    p.set_defaults(func=cmd_expand)

    p = subs.add_parser("census", help="path histogram of a derivative polynomial")
    _add_spec_arguments(p)
    p.add_argument("--depth", "-L", type=int, default=6)
    p.add_argument("--wrt", "-j", type=int, default=0, help="source state index")
    p.add_argument(
        "--check",
        choices=("binomial", "single-path", "widest"),
        help="also check a structural claim (exit 1 on violation)",
    )
    _add_common(p)
    p.set_defaults(func=cmd_census)

    p = subs.add_parser("equiv", help="compare two formulas by value and structure")
    p.add_argument("spec_a", help="file path or builtin name")
    p.add_argument("spec_b", help="file path or builtin name")
    p.add_argument("--depth", "-L", type=int, default=6)
    p.add_argument(
        "--structural",
        action="store_true",
        help="also require graph isomorphism for exit 0",
    )
    _add_common(p)
    p.set_defaults(func=cmd_equiv)

    p = subs.add_parser("graph", help="compile a formula into an architecture graph")
    _add_spec_arguments(p)
    p.add_argument("--depth", "-L", type=int, default=6)
    p.add_argument(
        "--propagation",
        action="store_true",
        help="report identity-edge connectivity instead of exporting",
    )
    _add_common(p, fmt_choices=("dot", "json", "text"))
    p.set_defaults(func=cmd_graph)

    p = subs.add_parser("verify", help="check symbolic derivatives against Jacobians")
    _add_spec_arguments(p)
    p.add_argument("--depth", "-L", type=int, default=6)
    p.add_argument("--wrt", "-j", type=int, default=None, help="default: every state")
    p.add_argument("--dim", "-d", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="number of seeds to sweep")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument(
        "--activation",
        choices=("none", "tanh"),
        default="none",
        help="tanh switches to the finite-difference check",
    )
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--fd-tol", type=float, default=1e-4)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = subs.add_parser(
        "chain-identity", help="verify the two-step chain-rule identity"
    )
    _add_spec_arguments(p)
    p.add_argument("--depth", "-L", type=int, default=6, help="check m = 2..depth")
    _add_common(p)
    p.set_defaults(func=cmd_chain_identity)

    p = subs.add_parser("stats", help="Friedman and Nemenyi analysis of a CSV table")
    p.add_argument("table", help="CSV path, or fixture name (table1, table2)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--graph-json", help="write Friedman-graph data to this file")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    try:
        return args.func(args)
    except (RecurError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
