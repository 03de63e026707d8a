"""Command-line interface: analyze, solve, bench and gen.

Exit codes: 0 on success, 1 when no solution is found within the budget,
2 on usage or validation errors.  ``MOITO_WORKERS`` sets the worker count
used by the monotonicity analysis.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from monoprune.abstract import TOP_HOLES, AbstractSemantics
from monoprune.artifact import SchemaError, analyze_problem, read_artifact, write_artifact
from monoprune.bench import load_suite, resolve_problem, run_bench, to_csv
from monoprune.gen import UnknownFamily, gen
from monoprune.gfa import example_inputs, solve_holes
from monoprune.grammar import format_term
from monoprune.orders import DomainSample, OrderAssignment, SortMismatch, synthesize_orders
from monoprune.problemfile import ProblemError, parse_problem
from monoprune.search import Mode, Pruner, SearchConfig, search
from monoprune.sexp import ParseError
from monoprune.smt import emit_profile_checks

OK, NO_SOLUTION, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def workers() -> int:
    raw = os.environ.get("MOITO_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"MOITO_WORKERS must be an integer, got {raw!r}") from None
    return max(1, n)


def _parse_orders(text: str) -> OrderAssignment:
    mapping = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, name = item.partition("=")
        if not sep:
            raise UsageError(f"expected sort=order, got {item!r}")
        mapping[key.strip()] = name.strip()
    return OrderAssignment.of(mapping)


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_analyze(args) -> int:
    problem = resolve_problem(args.problem)
    candidates = [_parse_orders(args.orders)] if args.orders else None
    art = analyze_problem(problem, workers(), candidates, gfa=not args.no_holes)
    if args.emit_smt:
        out = Path(args.emit_smt)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(emit_profile_checks(problem, art.omega()).items()):
            (out / name).write_text(text, encoding="utf-8")
    _write(args.output, write_artifact(art))
    return OK
    return OK


def cmd_solve(args) -> int:
    problem = resolve_problem(args.problem)
    mode = Mode.parse(args.mode)
    cfg = SearchConfig(max_size=args.max_size, max_candidates=args.max_candidates, mode=mode)
    pruner = None
    if mode is not Mode.OFF:
        if args.artifact:
            art = read_artifact(Path(args.artifact).read_text(encoding="utf-8"))
            if art.problem != problem.name:
                raise UsageError(f"artifact is for problem {art.problem!r}, not {problem.name!r}")
            profile = art.profile()
            table = art.hole_table(problem) if art.holes else None
        else:
            _, profile = synthesize_orders(problem, cfg=DomainSample(seed=args.seed), workers=workers())
            table = None
        sem = AbstractSemantics(problem, profile)
        if mode is Mode.TOP:
            table = TOP_HOLES
        elif table is None:
            table = solve_holes(sem, example_inputs(sem)).table
        pruner = Pruner(sem, table, cfg.fuel)
    result = search(problem, cfg, pruner=pruner)
    if args.stats:
        stats = {
            "problem": problem.name,
            "mode": mode.value,
            "solved": result.solved,
            "solution": format_term(result.program) if result.solved else None,
            "solutionSize": result.program.size if result.solved else None,
            **{_camel(k): v for k, v in result.stats.deterministic().items()},
        }
        _write(args.stats, json.dumps(stats, sort_keys=True, indent=2) + "\n")
    if not result.solved:
        print(f"no solution within budget ({result.stats.dequeued} candidates)", file=sys.stderr)
        return NO_SOLUTION
    print(format_term(result.program))
    return OK


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(w.capitalize() for w in rest)


def cmd_bench(args) -> int:
    modes = [Mode.parse(m) for m in args.modes.split(",")]
    rows = run_bench(load_suite(args.suite), modes, args.max_size, args.max_candidates)
    _write(args.csv, to_csv(rows))
    return OK


def cmd_gen(args) -> int:
    texts = gen(args.family, args.seed)
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        for text in texts:
            (out / f"{parse_problem(text).name}.problem").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write("\n".join(texts))
    return OK


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="monoprune", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="synthesize orders and hole abstractions, write the JSON artifact")
    a.add_argument("problem", help="problem file or bundled problem name")
    a.add_argument("--orders", help="fix the order assignment, e.g. bv4=bvUnsignedLeq,int=intLeq")
    a.add_argument("--emit-smt", metavar="DIR", help="write SMT-LIB monotonicity checks into DIR")
    a.add_argument("--no-holes", action="store_true", help="skip grammar-flow analysis")
    a.add_argument("-o", "--output", help="artifact path (default stdout)")
    a.set_defaults(fn=cmd_analyze)

    s = sub.add_parser("solve", help="enumerate programs consistent with the examples")
    s.add_argument("problem", help="problem file or bundled problem name")
    s.add_argument("--artifact", help="reuse a JSON artifact instead of re-running the analysis")
    s.add_argument("--mode", default="gfa", choices=["off", "top", "gfa", "topHoles", "gfaHoles"])
    s.add_argument("--max-size", type=int, default=25)
    s.add_argument("--max-candidates", type=int, default=10_000_000)
    s.add_argument("--seed", type=int, default=0, help="seed of the monotonicity sample")
    s.add_argument("--stats", help="write deterministic search statistics as JSON")
    s.set_defaults(fn=cmd_solve)

    b = sub.add_parser("bench", help="compare pruning modes; writes CSV")
    b.add_argument("suite", help="'bundled', a directory of .problem files, or one problem")
    b.add_argument("--modes", default="off,top,gfa")
    b.add_argument("--max-size", type=int, default=25)
    b.add_argument("--max-candidates", type=int, default=200_000)
    b.add_argument("--csv", help="CSV path (default stdout)")
    b.set_defaults(fn=cmd_bench)

    g = sub.add_parser("gen", help="print or write generated benchmark problems")
    g.add_argument("family")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", metavar="DIR", help="write one .problem file per item into DIR")
    g.set_defaults(fn=cmd_gen)
    return ap


def main(argv=None) -> int:
    try:
        args = parser().parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.fn(args)
    except (UsageError, ProblemError, ParseError, SchemaError, UnknownFamily, SortMismatch, ValueError, OSError) as exc:
        print(f"monoprune: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    raise SystemExit(main())
