"""Command-line interface: ``graphmc <subcommand> ...``.

Exit codes: 0 pass, 1 check failure, 2 inconclusive, 3 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__, cobar, ihx, kontsevich, mc, verify
from .dsl import DSLSyntaxError, parse_graph, serialize
from .graphs import GraphError, GraphSum, decode_key
from .operad import bracket, star

SCHEMA = "graphmc-report/1"
EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- inputs

def resolve_element(source: str) -> tuple:
    """Return (label, GraphSum, fixture or None) for a file path, fixture name or inline DSL."""
    path = Path(source)
    if path.suffix == ".g" and path.is_file():
        text = path.read_text(encoding="utf-8")
        return path.stem, parse_graph(text), None
    name = path.stem if path.suffix == ".g" else source
    if name in mc.fixture_names():
        fx = mc.load_fixture(name)
        return name, fx.value, fx
    if path.suffix == ".g":
        raise UsageError(f"no such file or fixture: {source}")
    return "input", parse_graph(source), None


def parse_bounds(text: Optional[str]):
    if text is None:
        return None
    try:
        m_max, e_max = (int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--bounds expects M,E (two integers), got {text!r}") from None
    return m_max, e_max


def fixture_values() -> Dict[str, GraphSum]:
    return {name: fx.value for name, fx in mc.load_fixtures().items()}


def describe(x: GraphSum) -> str:
    named = verify.name_element(x, fixture_values())
    return named if named is not None else serialize(ihx.reduce(x))


def split_args(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


# ---------------------------------------------------------------- output

def emit(report: Dict, fmt: str, text_lines: Sequence[str]) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2, sort_keys=True, default=str))
    else:
        for line in text_lines:
            print(line)


def base_report(args, command: str, inputs: Dict) -> Dict:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "cap": args.cap,
        "bounds": list(args.bounds) if args.bounds else None,
    }


# ---------------------------------------------------------------- subcommands

def cmd_verify_paper(args) -> int:
    fixtures = mc.load_fixtures()
    values = {name: fx.value for name, fx in fixtures.items()}
    if args.corrupt_fixture:
        if args.corrupt_fixture not in values:
            raise UsageError(f"unknown fixture {args.corrupt_fixture!r}")
        values[args.corrupt_fixture] = verify.corrupt(values[args.corrupt_fixture])
    ctx = verify.Context(values, cap=args.cap, bounds=args.bounds, lie=kontsevich.load_lie(args.lie))
    only = [int(v) for v in split_args(args.checks)] if args.checks else None
    results = []
    timings = {}
    for cid, _, _ in verify.CHECKS:
        if only is not None and cid not in only:
            continue
        start = time.perf_counter()
        results.extend(verify.run_checks(ctx, [cid]))
        timings[cid] = round(time.perf_counter() - start, 3)
    status = verify.overall_status(results)
    report = base_report(args, "verify-paper", {"corrupt_fixture": args.corrupt_fixture, "lie": ctx.lie.name})
    report["fixtures"] = {name: fx.sha256 for name, fx in sorted(fixtures.items())}
    report["checks"] = [r.to_json() for r in results]
    report["status"] = status
    if args.timing:
        report["timing"] = timings
    lines = []
    for r in results:
        line = f"[{r.status.upper()}] {r.id}. {r.name}: {r.detail}"
        if r.offending:
            line += f"\n    first offending term: {r.offending}"
        lines.append(line)
    counts = {s: sum(1 for r in results if r.status == s) for s in (verify.PASS, verify.FAIL, verify.INCONCLUSIVE)}
    lines.append(f"summary: {counts['pass']} pass, {counts['fail']} fail, {counts['inconclusive']} inconclusive")
    emit(report, args.format, lines)
    return {verify.PASS: EXIT_PASS, verify.FAIL: EXIT_FAIL, verify.INCONCLUSIVE: EXIT_INCONCLUSIVE}[status]


def _binary(args, command: str, op) -> int:
    la, x, _ = resolve_element(args.x)
    lb, y, _ = resolve_element(args.y)
    raw = op(x, y).truncate(args.cap)
    named = describe(raw)
    report = base_report(args, command, {"x": la, "y": lb})
    report["result"] = {"named": named, "raw": serialize(raw), "reduced": serialize(ihx.reduce(raw))}
    lines = [named]
    if args.raw:
        lines.append(f"raw: {serialize(raw)}")
    emit(report, args.format, lines)
    return EXIT_PASS


def cmd_bracket(args) -> int:
    return _binary(args, "bracket", bracket)


def cmd_star(args) -> int:
    return _binary(args, "star", star)


def cmd_diff(args) -> int:
    label, x, _ = resolve_element(args.x)
    _, d, _ = resolve_element(args.by)
    raw = bracket(d, x).truncate(args.cap)
    named = describe(raw)
    report = base_report(args, "diff", {"x": label, "by": args.by})
    report["result"] = {"named": named, "raw": serialize(raw), "reduced": serialize(ihx.reduce(raw))}
    emit(report, args.format, [named] + ([f"raw: {serialize(raw)}"] if args.raw else []))
    return EXIT_PASS


def cmd_reduce(args) -> int:
    label, x, _ = resolve_element(args.x)
    if args.bounds:
        try:
            ihx.check_bounds(x, *args.bounds)
        except ihx.SliceError as exc:
            report = base_report(args, "reduce", {"x": label})
            report["status"] = verify.INCONCLUSIVE
            emit(report, args.format, [f"inconclusive: {exc}: widen --bounds"])
            return EXIT_INCONCLUSIVE
    red = ihx.reduce(x, extended=not args.literal)
    report = base_report(args, "reduce", {"x": label, "literal": args.literal})
    report["result"] = {"reduced": serialize(red), "zero": not red}
    emit(report, args.format, [serialize(red)])
    return EXIT_PASS


def cmd_mc(args) -> int:
    label, x, fx = resolve_element(args.x)
    known = args.known_through if args.known_through is not None else (fx.known_through if fx else None)
    res = mc.mc_check(x, mc.TruncationPolicy(args.cap), known_through=known)
    report = base_report(args, "mc", {"x": label, "known_through": known})
    report["result"] = {
        "determined_cap": res.determined_cap,
        "residuals": {str(g): serialize(v) for g, v in res.residuals.items()},
        "raw_nonzero_gradings": sorted(res.raw),
        "passed": res.passed,
    }
    lines = []
    for g in range(2, res.cap + 1):
        tag = "" if g <= res.determined_cap else " (not determined by the input)"
        value = res.residuals.get(g)
        lines.append(f"grading {g}: {'0' if value is None else serialize(value)}{tag}")
    lines.append("MC equation holds" if res.passed else "MC equation fails")
    emit(report, args.format, lines)
    return EXIT_PASS if res.passed else EXIT_FAIL


def cmd_gauge(args) -> int:
    lx, xi, fxi = resolve_element(args.xi)
    la, alpha, fal = resolve_element(args.alpha)
    res = mc.gauge_act(xi, alpha, mc.TruncationPolicy(args.cap),
                       alpha_known_through=fal.known_through if fal else None,
                       xi_known_through=fxi.known_through if fxi else None)
    determined = res.determined()
    named = describe(determined)
    report = base_report(args, "gauge", {"xi": lx, "alpha": la})
    report["result"] = {"determined_cap": res.determined_cap, "named": named,
                        "reduced": serialize(res.value)}
    lines = [f"{named}  (determined through grading {res.determined_cap})"]
    emit(report, args.format, lines)
    return EXIT_PASS


def cmd_cohomology(args) -> int:
    if args.cobar:
        h = cobar.cobar_cohomology(args.n)
        dims = "(" + ",".join(str(d) for d in h.dims_tuple()) + ")"
        report = base_report(args, "cohomology", {"cobar": True, "n": args.n})
        report["result"] = {"dims": list(h.dims_tuple()), "total": h.total,
                            "omega_closed": h.omega_closed, "omega_nonzero": h.top_class_nonzero}
        emit(report, args.format, [f"dims {dims}",
                                   f"omega_{args.n} closed: {h.omega_closed}, nonzero class: {h.top_class_nonzero}"])
        return EXIT_PASS
    if args.m is None:
        raise UsageError("graph cohomology needs -m (number of internal vertices), or pass --cobar")
    rep = cobar.slice_cohomology_vs_corollary(args.n, args.m)
    report = base_report(args, "cohomology", {"cobar": False, "n": args.n, "m": args.m})
    report["result"] = {"graph_dims": {str(k): v for k, v in rep.graph_dims.items()},
                        "antisymmetric_core_dim": rep.antisymmetric_core_dim, "agrees": rep.agrees}
    dims = ", ".join(f"H^{k}={v}" for k, v in sorted(rep.graph_dims.items()))
    emit(report, args.format, [dims, f"antisymmetric cores: {rep.antisymmetric_core_dim}; agrees: {rep.agrees}"])
    return EXIT_PASS if rep.agrees else EXIT_FAIL


def cmd_enumerate(args) -> int:
    keys = ihx.enumerate_slice(args.n, args.m, args.e)
    if args.lie_degree is not None:
        keys = tuple(k for k in keys if decode_key(k).lie_degree() == args.lie_degree)
    graphs = [str(decode_key(k)) for k in keys]
    report = base_report(args, "enumerate", {"n": args.n, "m": args.m, "e": args.e})
    q = ihx.quotient(args.n, args.m, args.e)
    report["result"] = {"count": len(graphs), "graphs": graphs, "ihx_rank": q.rank,
                        "quotient_dim": q.dimension}
    emit(report, args.format, graphs + [f"{len(graphs)} graphs; quotient dimension {q.dimension}"])
    return EXIT_PASS


def cmd_represent(args) -> int:
    label, x, _ = resolve_element(args.x)
    lie = kontsevich.load_lie(args.lie)
    polys = [kontsevich.parse_poly(a, lie.dim) for a in split_args(args.args)] if args.args else []
    arities = {decode_key(k).n for k in x}
    if len(arities) > 1:
        raise UsageError(f"{label} mixes arities {sorted(arities)}; pick one term")
    if arities and len(polys) != next(iter(arities)):
        raise UsageError(f"{label} has arity {next(iter(arities))} but {len(polys)} arguments were given")
    value = kontsevich.B_eval(x, polys, lie)
    report = base_report(args, "represent", {"x": label, "lie": lie.name, "args": [str(p) for p in polys]})
    report["result"] = str(value)
    emit(report, args.format, [str(value)])
    return EXIT_PASS


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--cap", type=int, default=4, help="maximal second grading (default 4)")
    common.add_argument("--bounds", default=None, help="IHX slice bounds M,E (internal vertices, edges)")
    common.add_argument("--lie", default="so3", help="Lie algebra preset or JSON/TOML config (default so3)")
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = _Parser(prog="graphmc", description="Graph complexes, IHX quotients and Maurer-Cartan checks.")
    parser.add_argument("--version", action="version", version=f"graphmc {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("verify-paper", parents=[common], help="run the ten-step verification pipeline")
    p.add_argument("--corrupt-fixture", metavar="NAME", help="negate one coefficient of a fixture first")
    p.add_argument("--checks", help="comma-separated subset of check numbers")
    p.add_argument("--timing", action="store_true", help="include per-check timings in JSON output")
    p.set_defaults(func=cmd_verify_paper)

    for name, func, help_text in (("bracket", cmd_bracket, "Lie bracket [x, y]"),
                                  ("star", cmd_star, "pre-Lie product x * y")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("x")
        p.add_argument("y")
        p.add_argument("--raw", action="store_true", help="also print the unreduced result")
        p.set_defaults(func=func)

    p = sub.add_parser("diff", parents=[common], help="differential [d, x], d = a1 + a2 by default")
    p.add_argument("x")
    p.add_argument("--by", default="alpha0", help="element to bracket with (default alpha0)")
    p.add_argument("--raw", action="store_true")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("reduce", parents=[common], help="normal form modulo IHX")
    p.add_argument("x")
    p.add_argument("--literal", action="store_true", help="omit relations split at a trivalent source")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("mc", parents=[common], help="Maurer-Cartan residuals by second grading")
    p.add_argument("x")
    p.add_argument("--known-through", type=int, default=None,
                   help="highest grading at which the input is exact (fixtures know their own)")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("gauge", parents=[common], help="exp(ad_xi) alpha modulo IHX")
    p.add_argument("xi")
    p.add_argument("alpha")
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("cohomology", parents=[common], help="cobar or graph-slice cohomology")
    p.add_argument("--cobar", action="store_true")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-m", type=int, default=None)
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("enumerate", parents=[common], help="list admissible graphs in a slice")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-m", type=int, required=True)
    p.add_argument("-e", type=int, required=True)
    p.add_argument("--lie-degree", type=int, default=None)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("represent", parents=[common], help="evaluate B on polynomial arguments")
    p.add_argument("x")
    p.add_argument("--args", default="", help='comma-separated polynomials, e.g. "x_1,x_2*p^1"')
    p.set_defaults(func=cmd_represent)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return exc.code
    try:
        args.bounds = parse_bounds(args.bounds)
        if args.cap < 1:
            raise UsageError("--cap must be at least 1")
        return args.func(args)
    except (UsageError, DSLSyntaxError, GraphError, FileNotFoundError,
            kontsevich.LieDataError, ValueError) as exc:
        print(f"graphmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
