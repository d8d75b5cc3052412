"""Command-line front end.

    igusacm --delta0 5 --a 10 --b 2 [--c1 16] [--c2 16] [--hhat] [--out F] [--json F]
    igusacm selftest [--suite NAME] [--s BITS] [--seed N]

Exit codes: 0 success, 1 selftest failure, 2 invalid field, 3 resource
budget exceeded, 4 rounding ambiguity after the automatic retry.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from .approx import PrecisionCapError, precision_cap, set_precision_cap
from .classpoly import RoundingAmbiguityError, RunConfig, igusa_class_polynomials
from .cmfield import CMFieldSpec, InconclusiveError, InvalidFieldError, ResourceError
from .selftest import SUITES, run_suites
from .theta import PrecisionTooLowError

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_AMBIGUOUS = 4


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="igusacm", description="Igusa class polynomials of primitive quartic CM fields.")
    p.add_argument("--delta0", type=int, required=True, help="real quadratic fundamental discriminant")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--c1", type=_positive, default=16, help="denominator exponent constant (default 16)")
    p.add_argument("--c2", type=_positive, default=16, help="denominator exponent constant (default 16)")
    p.add_argument("--hhat", action="store_true", help="also emit the interpolation polynomials Hhat2, Hhat3")
    p.add_argument("--out", type=Path, help="write polynomial blocks here instead of stdout")
    p.add_argument("--json", type=Path, help="write the audit record here")
    p.add_argument("--precision-cap", type=_positive, help="refuse computations needing more bits")
    p.add_argument("--seed", type=int, default=0, help="accepted for symmetry with selftest; the run is deterministic")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_selftest_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="igusacm selftest", description="Run the oracle comparison suites.")
    p.add_argument("--suite", choices=sorted(SUITES), action="append", help="run only this suite (repeatable)")
    p.add_argument("--s", type=_positive, default=60, help="theta precision in bits (default 60)")
    p.add_argument("--seed", type=int, default=0)
    return p


def _write_audit(path: Path | None, audit: dict) -> None:
    if path is not None:
        path.write_text(json.dumps(audit, indent=2, sort_keys=True, default=str) + "\n")


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "selftest":
        return selftest(argv[1:])
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    previous_cap = precision_cap()
    if args.precision_cap:
        set_precision_cap(args.precision_cap)
    try:
        return _compute(args)
    finally:
        set_precision_cap(previous_cap)


def _compute(args: argparse.Namespace) -> int:
    spec = CMFieldSpec(args.delta0, args.a, args.b)
    cfg = RunConfig(c1=args.c1, c2=args.c2, hhat=args.hhat)
    audit: dict = {}
    caught: list = []
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = igusa_class_polynomials(spec, cfg, audit)
    except InvalidFieldError as exc:
        print(f"error[invalid-field]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ResourceError, PrecisionCapError, InconclusiveError) as exc:
        print(f"error[resource]: {exc}", file=sys.stderr)
        _write_audit(args.json, audit)
        return EXIT_RESOURCE
    except (RoundingAmbiguityError, PrecisionTooLowError) as exc:
        print(f"error[ambiguity]: {exc}", file=sys.stderr)
        _write_audit(args.json, audit)
        return EXIT_AMBIGUOUS
    finally:
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)

    text = result.text()
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    _write_audit(args.json, result.audit)
    return EXIT_OK


def selftest(argv: list[str] | None = None) -> int:
    args = build_selftest_parser().parse_args(argv or [])
    results = run_suites(args.suite, seed=args.seed, s=args.s)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.ok for r in results) else EXIT_SELFTEST


def main() -> None:
    sys.exit(run())
