"""Command-line interface: instance generation, solving, reports, verification.

Exit codes: 0 success, 2 config error, 3 solver or transport error
(including partially failed run batches), 4 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .bench import (
    ConfigError,
    cmd_gen,
    cmd_report,
    cmd_solve,
    cmd_verify,
    format_table,
    load_config,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qals",
        description="QUBO solver toolkit: generate instances, run solvers, check results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a deterministic instance file")
    gen.add_argument("--kind", required=True, choices=("npp", "tsp"))
    gen.add_argument("--size", required=True, type=int, help="numbers or cities")
    gen.add_argument(
        "--range", required=True, type=float, dest="value_range",
        help="npp: values in [1, range]; tsp: distances in [0, range]",
    )
    gen.add_argument("--seed", required=True, type=int)
    gen.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="run the solver described by a config file")
    solve.add_argument("--config", required=True, help="flat key = value file")
    solve.add_argument("--seed", type=int, default=None, help="override the config seed")
    solve.add_argument(
        "--backend", default=None,
        help="override the backend: exhaustive|sa|random|bridge:<command>",
    )
    solve.add_argument("--trace", default=None, help="override the trace output path")

    report = sub.add_parser("report", help="merge record files into a comparison table")
    report.add_argument("records", nargs="+", help="JSON-lines record files")
    report.add_argument("--csv", default=None, help="also write the table as CSV")

    verify = sub.add_parser("verify", help="re-check reported objectives from stored solutions")
    verify.add_argument("records", nargs="+", help="JSON-lines record files")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return _run_gen(args)
        if args.command == "solve":
            return _run_solve(args)
        if args.command == "report":
            return _run_report(args)
        return _run_verify(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _run_gen(args) -> int:
    try:
        cmd_gen(args.kind, args.size, args.value_range, args.seed, args.out)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote {args.kind} instance to {args.out}")
    return EXIT_OK


def _run_solve(args) -> int:
    try:
        config = load_config(args.config)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.backend is not None:
        overrides["backend"] = args.backend
    if args.trace is not None:
        overrides["trace"] = args.trace
    if overrides:
        config = dataclasses.replace(config, **overrides)
    try:
        report = cmd_solve(config)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(format_table(report.aggregates()))
    failures = [r for r in report.records if not r.valid]
    for record in failures:
        print(f"run {record.run_index} failed: {record.error}", file=sys.stderr)
    return EXIT_SOLVER if failures else EXIT_OK


def _run_report(args) -> int:
    try:
        table = cmd_report(args.records, csv_out=args.csv)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(table)
    return EXIT_OK


def _run_verify(args) -> int:
    try:
        checked, problems = cmd_verify(args.records)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for problem in problems:
        print(problem, file=sys.stderr)
    if problems:
        print(f"verification failed: {len(problems)} problem(s)", file=sys.stderr)
        return EXIT_VERIFY
    print(f"verified {checked} record(s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
