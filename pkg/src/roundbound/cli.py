"""Command line: ``roundbound [prove] SCRIPT`` and ``roundbound check CERT``.

Exit codes for ``prove``: 0 all goals proved, 1 some goal unproved,
2 input error.  For ``check``: 0 valid, 1 invalid, 2 structural error.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .bisect import BisectError
from .checker import check_text
from .engine import Config, EmptyGoalError
from .logic import UnspecifiedHypothesis
from .parser import ParseError
from .session import certificate_text, prove_script, render_report

__all__ = ["main", "build_parser"]


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _precision(text: str) -> int:
    n = int(text)
    if n < 2:
        raise argparse.ArgumentTypeError("must be at least 2")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="roundbound",
                                 description="Certified bounds for expressions with roundings.")
    sub = ap.add_subparsers(dest="command")
    p = sub.add_parser("prove", help="prove a script (default)")
    p.add_argument("script", help="script file, or - for standard input")
    p.add_argument("--precision", type=_precision, default=128,
                   help="working precision of interval endpoints, in bits (default 128)")
    p.add_argument("--budget", type=_positive, default=100,
                   help="saturation rounds per run (default 100)")
    p.add_argument("--depth", type=_positive, default=32,
                   help="maximal number of dichotomy splits per axis (default 32)")
    p.add_argument("--cert", metavar="PATH", help="write a widened certificate on success")
    p.add_argument("--quiet", action="store_true", help="print nothing but errors")
    c = sub.add_parser("check", help="check a certificate")
    c.add_argument("certificate")
    c.add_argument("--script", metavar="PATH",
                   help="also require the certificate to belong to this script")
    c.add_argument("--quiet", action="store_true")
    return ap


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _prove(args) -> int:
    try:
        source = _read(args.script)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    config = Config(precision=args.precision, max_iterations=args.budget,
                    dichotomy_depth=args.depth)
    try:
        result = prove_script(source, config)
    except ParseError as exc:
        print(f"{args.script}:{exc.line}:{exc.col}: error: {exc.message}", file=sys.stderr)
        return 2
    except (EmptyGoalError, UnspecifiedHypothesis, BisectError) as exc:
        print(f"{args.script}: error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        sys.stdout.write(render_report(result))
    if not result.proved:
        if args.cert and not args.quiet:
            print("no certificate written: some goals are unproved")
        return 1
    if args.cert:
        with open(args.cert, "w", encoding="utf-8") as fh:
            fh.write(certificate_text(result))
    return 0


def _check(args) -> int:
    try:
        text = _read(args.certificate)
        script = _read(args.script) if args.script else None
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = check_text(text, script)
    if not args.quiet:
        print(report.verdict)
    if report.structural:
        return 2
    return 0 if report.valid else 1


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in ("prove", "check", "-h", "--help"):
        argv.insert(0, "prove")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command is None:
        ap.print_help()
        return 2
    return _check(args) if args.command == "check" else _prove(args)


if __name__ == "__main__":
    sys.exit(main())
