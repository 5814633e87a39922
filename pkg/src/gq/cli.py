"""Command-line driver.

    gq run FILE [--report out.json] [--steps N] [--tolerance T] [--seed S]
    gq check NAME [-s SOURCE] [ARG ...]
    gq checks

Exit codes: 0 all checks pass (degraded-mode counts as a non-failure),
1 at least one check failed, 2 parse or semantic error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dsl
from .errors import ParseError, SemanticError
from .session import CHECKS, Options, execute, report_render


def _options_from(args) -> Options:
    return Options(steps=args.steps, tolerance=args.tolerance, seed=args.seed)


def _run_program(program, options, report_path):
    try:
        report = execute(program, options)
    except (ParseError, SemanticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(report_render(report, "text").decode())
    if report_path:
        Path(report_path).write_bytes(report_render(report, "machine"))
    return 0 if report.all_ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gq", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a DSL program")
    run.add_argument("file", help="program file")
    run.add_argument("--report", help="write the machine (JSON) report here")
    run.add_argument("--steps", type=int, default=10_000)
    run.add_argument("--tolerance", type=float, default=1e-6)
    run.add_argument("--seed", type=int, default=0)

    check = sub.add_parser("check", help="run a single named check")
    check.add_argument("name", help="check name (see `gq checks`)")
    check.add_argument("args", nargs="*", help="check arguments (bound names)")
    check.add_argument("-s", "--source", default="",
                       help="DSL statements that set up the bindings")
    check.add_argument("--report", help="write the machine (JSON) report here")
    check.add_argument("--steps", type=int, default=10_000)
    check.add_argument("--tolerance", type=float, default=1e-6)
    check.add_argument("--seed", type=int, default=0)

    sub.add_parser("checks", help="list available checks")

    args = parser.parse_args(argv)

    if args.command == "checks":
        width = max(len(n) for n in CHECKS)
        for name in sorted(CHECKS):
            print(f"{name:<{width}}  {CHECKS[name][2]}")
        return 0

    if args.command == "run":
        path = Path(args.file)
        try:
            source = path.read_text()
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        try:
            program = dsl.parse(source)
        except ParseError as exc:
            print(f"error: {args.file}:{exc}", file=sys.stderr)
            return 2
        options = _options_from(args)
        options.base_dir = path.parent
        return _run_program(program, options, args.report)

    if args.command == "check":
        if args.name not in CHECKS:
            print(f"error: unknown check {args.name!r}", file=sys.stderr)
            return 2
        source = args.source + f"\ncheck {args.name} {' '.join(args.args)};\n"
        try:
            program = dsl.parse(source)
        except ParseError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return _run_program(program, _options_from(args), args.report)

    return 2


if __name__ == "__main__":
    sys.exit(main())
