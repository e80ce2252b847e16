"""Command-line entry point.

Exit codes: 0 success, 1 failed selftest, 2 input error, 3 engine error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import List, Optional

from . import __version__
from .parser import LieSyntaxError, UnknownSymbol, UnsupportedFunction, ValidationError
from .report import (InputError, envelope, fields_of, load, render_json, render_text, section_commute,
                     section_reduce, section_symmetries, section_verify)

EXIT_OK, EXIT_SELFTEST, EXIT_INPUT, EXIT_ENGINE = 0, 1, 2, 3
INPUT_ERRORS = (InputError, LieSyntaxError, UnknownSymbol, UnsupportedFunction, ValidationError, OSError)


def _ansatz(text: str):
    try:
        d1, d2 = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected d1,d2, got '{text}'") from None
    if d1 < 0 or d2 < 0:
        raise argparse.ArgumentTypeError("ansatz degrees must be non-negative")
    return d1, d2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lieze", description="Exact Lie point symmetry analysis of polynomial PDEs.")
    ap.add_argument("--version", action="version", version=f"lieze {__version__}")
    ap.add_argument("command", choices=["symmetries", "commute", "reduce", "verify", "selftest"])
    ap.add_argument("file", nargs="?", help="problem file (selftest defaults to the bundled example)")
    ap.add_argument("--ansatz", type=_ansatz, help="polynomial degrees d1,d2 of the generator ansatz")
    ap.add_argument("--subst", action="append", help="substitution name (repeatable; default all)")
    ap.add_argument("--stage2", action="store_true", help="chain the declared second stage")
    ap.add_argument("--solution", action="append", help="solution name (repeatable)")
    ap.add_argument("--all", action="store_true", help="verify every solution")
    ap.add_argument("--transform", metavar="GEN:EPS", help="apply the flow of GEN at EPS before verifying")
    ap.add_argument("--reference", metavar="FILE", help="file with reference fields or table")
    ap.add_argument("--format", choices=["text", "json"], default="text")
    ap.add_argument("--json", action="store_true", help="shorthand for --format json")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--points", type=int)
    return ap


def _settings(spec, args):
    over = {k: v for k, v in (("seed", args.seed), ("tol", args.tol), ("points", args.points)) if v is not None}
    if "points" in over and over["points"] < 1:
        raise InputError("--points must be positive")
    if "tol" in over and not over["tol"] > 0:
        raise InputError("--tol must be positive")
    spec.settings = dataclasses.replace(spec.settings, **over)
    return spec.settings


def _run(args) -> int:
    fmt = "json" if args.json else args.format
    if args.command == "selftest":
        from . import selftest

        summary = selftest.run(args.file, seed=args.seed)
        sys.stdout.write(render_json(summary) if fmt == "json" else selftest.render_text(summary))
        if not summary["passed"]:
            print(f"selftest: {summary['first_failure']} failed", file=sys.stderr)
            return EXIT_SELFTEST
        return EXIT_OK
    if args.file is None:
        raise InputError(f"{args.command} needs a problem file")
    loaded = load(args.file, require_equation=args.command != "commute")
    spec = loaded.spec
    settings = _settings(spec, args)
    ref = load(args.reference, require_equation=False).spec if args.reference else None
    if args.command == "symmetries":
        reference = fields_of(ref) if ref is not None and ref.fields else None
        section = section_symmetries(spec, args.ansatz, reference)
    elif args.command == "commute":
        section = section_commute(spec, reference=ref)
    elif args.command == "reduce":
        section = section_reduce(spec, args.subst, args.stage2)
    else:
        if not args.solution and not args.all:
            raise InputError("verify needs --solution NAME or --all")
        section = section_verify(spec, None if args.all else args.solution, args.transform)
    report = envelope(args.command, loaded, settings, section)
    sys.stdout.write(render_json(report) if fmt == "json" else render_text(report))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except INPUT_ERRORS as exc:
        print(f"lieze: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # engine failures never escape as tracebacks
        print(f"lieze: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
