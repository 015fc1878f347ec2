"""
Command line entry point.

    padepde <expand|pade|conditions|verify> --problem FILE [--order N] [--L n --M n] [--rules A,B] [--json PATH]
    padepde corpus [--filter PATTERN] [--json PATH] [--seed N]

Exit codes: 0 on success, 1 on usage errors, 2 on mathematical failures.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from .config import get_settings
from .errors import MathematicalFailure, PadePDEError, UsageError
from .parser import parse_list
from .pipeline import COMMANDS, run_pipeline
from .problem import load_problem

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MATH = 2


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="padepde", description="Rational solutions of nonlinear PDEs via Padé ansätze")
    commands = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = commands.add_parser(name, help=f"run the {name} stage")
        sub.add_argument("--problem", required=True, help="problem file")
        sub.add_argument("--order", type=int, help="series truncation degree")
        sub.add_argument("--L", dest="L", type=int, help="numerator degree")
        sub.add_argument("--M", dest="M", type=int, help="denominator degree")
        sub.add_argument("--rules", help="comma separated extra rule names (verify)")
        sub.add_argument("--json", help="write the structured report to PATH ('-' for stdout)")
    corpus = commands.add_parser("corpus", help="run the scenario corpus")
    corpus.add_argument("--filter", default=None, help="glob pattern on scenario names")
    corpus.add_argument("--json", help="write the structured report to PATH ('-' for stdout)")
    corpus.add_argument("--seed", type=int, help="base seed of the numeric oracle")
    return parser


def _write_json(target: str, payload: str) -> None:
    if target == "-":
        sys.stdout.write(payload + "\n")
    else:
        Path(target).write_text(payload + "\n", encoding="utf-8")


def _run_corpus(args, settings) -> int:
    from .phi4corpus import run_corpus

    if args.seed is not None:
        settings = settings.model_copy(update={"seed": args.seed})
    result = run_corpus(args.filter, settings=settings)
    if not result.rows:
        raise UsageError(f"No scenario matches '{args.filter}'")
    if args.json != "-":
        sys.stdout.write(result.to_text())
    if args.json:
        _write_json(args.json, result.to_json())
    return EXIT_OK if result.passed else EXIT_MATH


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        settings = get_settings()
    except ValidationError as error:
        sys.stderr.write(f"padepde: invalid configuration: {error}\n")
        return EXIT_USAGE
    logging.basicConfig(level=settings.log_level, format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "corpus":
            return _run_corpus(args, settings)
        problem = load_problem(args.problem)
        rules = parse_list(args.rules) if args.rules is not None else None
        report = run_pipeline(
            problem,
            args.command,
            order=args.order,
            L=args.L,
            M=args.M,
            rules=rules,
            settings=settings,
        )
    except MathematicalFailure as error:
        sys.stderr.write(f"padepde: {type(error).__name__}: {error}\n")
        return EXIT_MATH
    except (UsageError, PadePDEError) as error:
        sys.stderr.write(f"padepde: {error}\n")
        return EXIT_USAGE

    if args.json != "-":
        sys.stdout.write(report.to_text())
    if args.json:
        _write_json(args.json, report.to_json())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
