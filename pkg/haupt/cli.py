"""
Command-line front end.

    haupt expand 1 --prec 3
    haupt apply 6+3 --op up --p 2 --times 2 --prec 20
    haupt valuations 6+3 --p 2 --iters 4
    haupt pattern "0,1->0,3" --terms 8
    haupt catalog
    haupt check lehner --all
    haupt check moonshine --group a5.json --p 5

Series go to stdout in the text format of ``format_series``; check reports go
to stdout as a JSON envelope (or TSV rows); logs go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from fractions import Fraction

import orjson

from haupt import __version__
from haupt.config import get_settings
from haupt.errors import HauptError
from haupt.schemas.reports import ReportEnvelope, Verdict, combine_verdicts
from haupt.services.annihilation import (
    COMPRESSION_CASES,
    LEHNER_DATA,
    fit_rate_pattern,
    format_rate_pattern,
    parse_rate_pattern,
    valuation_sequence,
)
from haupt.services.catalog import get_catalog
from haupt.services.qseries import format_series, u_p_iter, v_m
from haupt.services.runner import CheckRunner, CheckTask, Report
from haupt.utils.logger import get_logger, setup_logging


logger = get_logger("CLI")

SUITES = ("congruences", "compression", "lehner", "rates", "cycle", "moonshine", "weak", "orderbound", "exponent")

CONGRUENCE_PRIMES = (2, 3, 5, 7, 11)

# (q, symbol, r): q^r divides J − 𝒯
EXPONENT_ROWS = (
    (2, "2+", 12),
    (2, "2", 13),
    (3, "3+", 6),
    (3, "3", 9),
    (5, "5", 5),
    (7, "7", 4),
)

COMPRESSION_DEFAULTS = (("b", "6|3", 2),)


# ============================================================
# Parser
# ============================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="haupt", description="Exact q-series toolkit for moonshine Hauptmoduln")
    parser.add_argument("--version", action="version", version=f"haupt {__version__}")
    parser.add_argument("--catalog", help="catalog file (default: $HAUPT_CATALOG or the bundled catalog)")
    parser.add_argument("--output", choices=("json", "tsv"), help="report format")
    parser.add_argument("--parallel", type=int, help="worker processes for check suites")
    parser.add_argument("--seed", type=int, help="seed recorded in the report envelope")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ...")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="print a normalized Hauptmodul")
    p.add_argument("symbol")
    p.add_argument("--prec", type=int, default=10, help="coefficients below q^prec")

    p = sub.add_parser("apply", help="apply U_p or V_m to a catalog series")
    p.add_argument("symbol")
    p.add_argument("--op", choices=("up", "vm"), required=True)
    p.add_argument("--p", type=int, required=True, help="p for U_p, m for V_m")
    p.add_argument("--times", type=int, default=1)
    p.add_argument("--prec", type=int, default=10, help="precision of the result")

    p = sub.add_parser("valuations", help="v_p(𝒯|U_p^n) for n = 1..iters")
    p.add_argument("symbol")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--iters", type=int, default=3)
    p.add_argument("--window", type=int, default=100)

    p = sub.add_parser("pattern", help="evaluate or fit a rate pattern")
    p.add_argument("pattern", nargs="?")
    p.add_argument("--terms", type=int, default=10)
    p.add_argument("--fit", help="comma-separated values to describe")

    sub.add_parser("catalog", help="list catalog symbols")

    p = sub.add_parser("check", help="run a check suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--symbol", action="append", help="group symbol (repeatable)")
    p.add_argument("--p", type=int, action="append", help="prime (repeatable for congruences)")
    p.add_argument("--q", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--alpha-max", type=int, default=1)
    p.add_argument("--alpha", type=Fraction, help="rate for symbols without tabulated data")
    p.add_argument("--case", choices=COMPRESSION_CASES)
    p.add_argument("--n-max", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--high", type=int, default=200, help="multiplicity precision (moonshine)")
    p.add_argument("--group", default="a5.json")
    p.add_argument("--all", action="store_true", help="run every tabulated row")
    return parser


# ============================================================
# Commands
# ============================================================

def cmd_expand(args: argparse.Namespace) -> int:
    series = get_catalog(args.catalog).expand(args.symbol, args.prec)
    sys.stdout.write(format_series(series))
    return 0


def cmd_apply(args: argparse.Namespace) -> int:
    catalog = get_catalog(args.catalog)
    if args.op == "up":
        series = catalog.expand(args.symbol, args.prec * args.p**args.times)
        result = u_p_iter(series, args.p, args.times).truncate(args.prec)
    else:
        series = catalog.expand(args.symbol, args.prec // args.p**args.times + 2)
        result = series
        for _ in range(args.times):
            result = v_m(result, args.p)
        result = result.truncate(args.prec)
    sys.stdout.write(format_series(result))
    return 0


def cmd_valuations(args: argparse.Namespace, mode: str) -> int:
    values = valuation_sequence(args.symbol, args.p, args.iters, args.window, get_catalog(args.catalog))
    if mode == "tsv":
        for n, v in enumerate(values, start=1):
            sys.stdout.write(f"{args.symbol}\t{args.p}\t{n}\t{v}\n")
    else:
        rows = [{"symbol": args.symbol, "p": args.p, "n": n, "v": str(v)} for n, v in enumerate(values, start=1)]
        sys.stdout.buffer.write(orjson.dumps(rows, option=orjson.OPT_INDENT_2) + b"\n")
    return 0


def cmd_pattern(args: argparse.Namespace) -> int:
    if args.fit:
        values = [int(part) for part in args.fit.split(",")]
        sys.stdout.write(format_rate_pattern(fit_rate_pattern(values)) + "\n")
    elif args.pattern:
        terms = parse_rate_pattern(args.pattern).terms(args.terms)
        sys.stdout.write(",".join(str(t) for t in terms) + "\n")
    else:
        raise HauptError("pattern needs a PATTERN argument or --fit")
    return 0


def cmd_catalog(args: argparse.Namespace) -> int:
    catalog = get_catalog(args.catalog)
    for symbol in catalog.symbols():
        sys.stdout.write(f"{symbol}\t{type(catalog.definition(symbol).construction).__name__}\n")
    return 0


# ============================================================
# Check suites
# ============================================================

def _prime(args: argparse.Namespace, default: int) -> int:
    return args.p[0] if args.p else default


def suite_tasks(args: argparse.Namespace, catalog_path: str | None) -> list[CheckTask]:
    """Expand suite flags into an ordered list of tasks."""
    windows = get_settings().windows
    symbols = args.symbol or []

    def task(check: str, **kwargs: object) -> CheckTask:
        return CheckTask(check, dict(kwargs), catalog_path)

    if args.suite == "congruences":
        return [
            task("congruences", p=p, alpha_max=args.alpha_max, window=args.window or 100)
            for p in (args.p or CONGRUENCE_PRIMES)
        ]
    if args.suite == "compression":
        window = args.window or windows.compression
        if symbols:
            if not args.case or not args.p:
                raise HauptError("compression with --symbol needs --case and --p")
            return [task("compression", case=args.case, gamma=s, p=args.p[0], window=window) for s in symbols]
        return [task("compression", case=c, gamma=s, p=p, window=window) for c, s, p in COMPRESSION_DEFAULTS]
    if args.suite == "lehner":
        rows = list(LEHNER_DATA) if args.all or not symbols else symbols
        return [task("lehner", symbol=s, window=args.window or windows.lehner) for s in rows]
    if args.suite == "rates":
        rows = list(LEHNER_DATA) if args.all or not symbols else symbols
        tasks = []
        for s in rows:
            datum = LEHNER_DATA.get(s)
            if datum is None and (not args.p or args.alpha is None):
                raise HauptError(f"no tabulated rate for {s}; pass --p and --alpha")
            tasks.append(
                task(
                    "rates",
                    symbol=s,
                    p=datum.p if datum else args.p[0],
                    alpha=datum.alpha if datum else args.alpha,
                    n_max=args.n_max or 5,
                    base_window=args.window or 100,
                )
            )
        return tasks
    if args.suite == "cycle":
        return [
            task("cycle", symbol=s, p=_prime(args, 13), n_max=args.n_max or 2, window=args.window or 50)
            for s in (symbols or ["1"])
        ]
    if args.suite == "weak":
        p = _prime(args, 5)
        n_max = args.n_max or 3
        window = args.window or max(1, windows.weak // p**n_max)
        return [task("weak", symbol=s, p=p, n_max=n_max, window=window) for s in (symbols or ["1"])]
    if args.suite == "moonshine":
        p = _prime(args, 5)
        n_max = args.n_max or 3
        window = args.window or max(1, windows.weak // p**n_max)
        return [
            task("assignment", group=args.group),
            task("moonshine", group=args.group, p=p, high=args.high, n_max=n_max, window=window),
        ]
    if args.suite == "orderbound":
        if not symbols or args.q is None or args.r is None:
            raise HauptError("orderbound needs --symbol (repeatable), --q and --r")
        return [task("orderbound", candidates=symbols, q=args.q, r=args.r, window=args.window or 500)]
    if args.suite == "exponent":
        if symbols:
            if args.q is None or args.r is None:
                raise HauptError("exponent with --symbol needs --q and --r")
            rows = [(args.q, s, args.r) for s in symbols]
        else:
            rows = list(EXPONENT_ROWS)
        return [task("exponent", symbol=s, q=q, r=r, window=args.window or 500) for q, s, r in rows]
    raise HauptError(f"unknown suite {args.suite!r}")


def _verdicts(reports: Sequence[Report]) -> list[Verdict]:
    return [r.verdict for r in reports]


def exit_code(verdicts: Sequence[Verdict]) -> int:
    """0 all pass, 1 any fail, 3 indeterminate without failures."""
    combined = combine_verdicts(list(verdicts))
    if combined is Verdict.FAIL:
        return 1
    if combined is Verdict.INDETERMINATE:
        return 3
    return 0


def render_reports(reports: Sequence[Report], mode: str, seed: int | None) -> bytes:
    if mode == "tsv":
        lines = [
            "\t".join((r.name, r.verdict.value, "" if getattr(r, "witness", None) is None else str(r.witness), str(r.window)))
            for r in reports
        ]
        return ("\n".join(lines) + "\n").encode()
    config = get_settings().as_dict()
    if seed is not None:
        config["seed"] = seed
    envelope = ReportEnvelope(version=__version__, config=config, checks=[r.to_dict() for r in reports])
    return orjson.dumps(envelope.model_dump(mode="json"), option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2) + b"\n"


def cmd_check(args: argparse.Namespace, mode: str, parallelism: int) -> int:
    tasks = suite_tasks(args, args.catalog)
    reports = CheckRunner(parallelism).run(tasks)
    sys.stdout.buffer.write(render_reports(reports, mode, args.seed))
    return exit_code(_verdicts(reports))


# ============================================================
# Entry point
# ============================================================

def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    setup_logging(level=args.log_level)
    mode = args.output or settings.output.mode
    parallelism = args.parallel or settings.runner.parallelism

    try:
        if args.command == "expand":
            return cmd_expand(args)
        if args.command == "apply":
            return cmd_apply(args)
        if args.command == "valuations":
            return cmd_valuations(args, mode)
        if args.command == "pattern":
            return cmd_pattern(args)
        if args.command == "catalog":
            return cmd_catalog(args)
        return cmd_check(args, mode, parallelism)
    except HauptError as exc:
        logger.error("❌ Command failed", command=args.command, error=str(exc), kind=type(exc).__name__)
        sys.stderr.write(f"haupt: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
