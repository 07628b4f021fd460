"""Command line front end: run DSL scripts against the kernel.

Usage::

    densalg script.dsl [more.dsl ...] [--json] [--strict-orientation]
                       [--seed N] [--ledger]

Reads from stdin when no script is given.  Exit codes: 0 success, 2 parse
error, 3 domain error (e.g. a weight-1 lift), 4 verification failure.
"""
from __future__ import annotations

import argparse
import sys

from .brackets import DomainError, convention_ledger
from .dsl import Interpreter, ParseError, parse
from .spoly import ChartMismatchError, SubstitutionError, UnknownVariableError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_VERIFY = 4


def build_parser():
    p = argparse.ArgumentParser(
        prog="densalg",
        description="Exact supercommutative calculus on odd cotangent bundles: "
        "odd brackets, divergence and delta operators, canonical lifts of "
        "weighted multivectors, and classification of Poisson lifts.",
    )
    p.add_argument("scripts", nargs="*", help="DSL script files (stdin if none)")
    p.add_argument("--json", action="store_true", help="emit results as JSON lines")
    p.add_argument(
        "--strict-orientation",
        action="store_true",
        help="reject orientation-reversing coordinate changes",
    )
    p.add_argument(
        "--seed", type=int, default=2024, help="seed for randomized identity suites"
    )
    p.add_argument(
        "--ledger",
        action="store_true",
        help="print the sign-convention ledger (derived with --seed) and exit",
    )
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = sys.stdout
    if args.ledger:
        out.write(convention_ledger(seed=args.seed))
        out.write("\n")
        return EXIT_OK

    sources = []
    if args.scripts:
        for path in args.scripts:
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    sources.append((path, fh.read()))
            except OSError as exc:
                sys.stderr.write("densalg: cannot read %s: %s\n" % (path, exc))
                return EXIT_PARSE
    else:
        sources.append(("<stdin>", sys.stdin.read()))

    interp = Interpreter(
        json_output=args.json, strict_orientation=args.strict_orientation
    )
    for label, text in sources:
        try:
            script = parse(text)
            interp.run(script)
        except ParseError as exc:
            sys.stderr.write("densalg: %s: %s\n" % (label, exc))
            return EXIT_PARSE
        except (DomainError, SubstitutionError, UnknownVariableError, ChartMismatchError) as exc:
            for line in interp.lines:
                out.write(line + "\n")
            sys.stderr.write("densalg: %s: %s\n" % (label, exc))
            return EXIT_DOMAIN
    for line in interp.lines:
        out.write(line + "\n")
    return EXIT_VERIFY if interp.failures else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
