"""Command-line front end.

    iterlab cf --m 1 --digits 60
    iterlab abel --a 9/5 --order 16 --digits 50 --chain 3
    iterlab abel --a 1.5 --sample 0.05:1.45:200
    iterlab translated --x0 2 --N 1000000 --order 13 --digits 120 --derivatives fd,forward,product,series
    iterlab series --order 13 --format latex

Exit codes: 0 success, 2 numeric/precision failure, 64 usage error.
The environment variable ``ITERLAB_DIGITS`` overrides every default precision.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

from . import abel, cf_rates, translated
from .errors import DomainError, IterlabError, ParseError, PrecisionError, UsageError
from .precision import Real

EXIT_OK = 0
EXIT_NUMERIC = 2
EXIT_USAGE = 64

DEFAULT_DIGITS = {"cf": 60, "abel": 50, "translated": 120, "series": 50}
MIN_DIGITS = {"cf": 10, "abel": 30, "translated": 30, "series": 10}


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageExit(message)


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    digits: int
    tolerance: Optional[str]
    fmt: str
    out: Optional[str]


def _default_digits(cmd: str) -> int:
    env = os.environ.get("ITERLAB_DIGITS")
    return int(env) if env else DEFAULT_DIGITS[cmd]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="iterlab", description="High-precision experiments on iterated maps.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    cf = sub.add_parser("cf", help="metallic-mean continued fraction convergence constants")
    cf.add_argument("--m", type=int, required=True)
    cf.add_argument("--digits", type=int)
    cf.add_argument("--tol")
    cf.add_argument("--recognize", action=argparse.BooleanOptionalAction, default=True)
    cf.add_argument("--out")

    ab = sub.add_parser("abel", help="principal Abel function of x - a x^2 + x^3")
    ab.add_argument("--a", required=True, help="e.g. 9/5, 1.9, sqrt(3)")
    ab.add_argument("--order", type=int, default=16)
    ab.add_argument("--digits", type=int)
    ab.add_argument("--tol")
    ab.add_argument("--chain", type=int, help="number of preimage steps k_max")
    ab.add_argument("--sample", help="LO:HI:COUNT grid for (x, f_a, F_a) rows")
    ab.add_argument("--normalization", choices=abel.NORMALIZATIONS, default="normal_form")
    ab.add_argument("--format", choices=("json", "csv"))
    ab.add_argument("--workers", type=int, default=1)
    ab.add_argument("--out")

    tr = sub.add_parser("translated", help="x_{n+1} = x_n + 1 + 1/x_n^2: C, C', C''")
    tr.add_argument("--x0", default="2")
    tr.add_argument("--N", type=int, default=translated.DEFAULT_N)
    tr.add_argument("--order", type=int, default=translated.DEFAULT_ORDER)
    tr.add_argument("--digits", type=int)
    tr.add_argument("--derivatives", default="", help="comma list from fd,forward,product,series")
    tr.add_argument("--eps", default="1e-20")
    tr.add_argument("--workers", type=int, default=1)
    tr.add_argument("--out")

    se = sub.add_parser("series", help="exact asymptotic expansion of the translated recurrence")
    se.add_argument("--order", type=int, default=translated.DEFAULT_ORDER)
    se.add_argument("--format", choices=("latex", "json"), default="latex")
    se.add_argument("--out")
    return p


def _emit(text: str, out: Optional[str]):
    if not text.endswith("\n"):
        text += "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> RunConfig:
    digits = args.digits if getattr(args, "digits", None) else _default_digits(args.cmd)
    if digits < MIN_DIGITS[args.cmd]:
        raise UsageError(f"--digits must be >= {MIN_DIGITS[args.cmd]} for {args.cmd}")
    tol = getattr(args, "tol", None)
    if tol is not None and Real.of(tol, max(digits, 10)) <= 0:
        raise UsageError("--tol must be positive")
    fmt = getattr(args, "format", None) or "json"
    return RunConfig(args.cmd, digits, tol, fmt, args.out)


def cmd_cf(args, cfg: RunConfig) -> str:
    if args.m < 1:
        raise UsageError("--m must be >= 1")
    res = cf_rates.convergence_constants(args.m, cfg.digits, cfg.tolerance, recognize=args.recognize)
    return res.dumps()


def _parse_grid(text: str):
    try:
        lo, hi, count = text.split(":")
        return lo, hi, int(count)
    except ValueError as exc:
        raise UsageError(f"--sample expects LO:HI:COUNT, got {text!r}") from exc


def cmd_abel(args, cfg: RunConfig) -> str:
    try:
        family = abel.CubicFamily.of(args.a, cfg.digits)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    series = abel.derive_abel_series(family.a, args.order, cfg.digits, args.normalization)
    chain = sample = None
    k_max = args.chain
    if k_max is None and args.sample is None:
        k_max = 3
    disc = family.a * family.a - 3
    if k_max is not None and disc >= -family.tiny:
        chain = abel.critical_chain(family, k_max, series)
    if args.sample:
        lo, hi, count = _parse_grid(args.sample)
        try:
            sample = abel.sample_graph(family, lo, hi, count, series, workers=args.workers)
        except DomainError as exc:
            raise UsageError(str(exc)) from exc
    fmt = args.format or ("csv" if sample is not None and chain is None else "json")
    if fmt == "csv":
        if sample is None:
            raise UsageError("--format csv needs --sample")
        return sample.to_csv()
    doc = {"series": series.to_json()}
    if chain is not None:
        doc["chain"] = chain.to_json()
    if sample is not None:
        doc["sample"] = [
            [x.to_plain(), fx.to_plain(), None if F is None else F.to_plain()] for x, fx, F in sample.rows
        ]
    return json.dumps(doc, indent=2, sort_keys=True)


def cmd_translated(args, cfg: RunConfig) -> str:
    if args.N < 1:
        raise UsageError("--N must be >= 1")
    wanted = tuple(d for d in args.derivatives.split(",") if d)
    unknown = set(wanted) - set(translated.ALL_DERIVATIVES)
    if unknown:
        raise UsageError(f"unknown --derivatives entries: {sorted(unknown)}")
    if args.order < 1:
        raise UsageError("--order must be >= 1")
    rep = translated.derivative_report(
        args.x0, args.N, args.order, cfg.digits, derivatives=wanted, eps=args.eps, workers=args.workers
    )
    return rep.dumps()


def cmd_series(args, cfg: RunConfig) -> str:
    if args.order < 1:
        raise UsageError("--order must be >= 1")
    table = translated.derive_expansion(args.order)
    if cfg.fmt == "latex":
        return table.to_latex()
    return json.dumps(table.to_json(), indent=2, sort_keys=True)


COMMANDS = {"cf": cmd_cf, "abel": cmd_abel, "translated": cmd_translated, "series": cmd_series}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config(args)
        text = COMMANDS[args.cmd](args, cfg)
    except _UsageExit:
        return EXIT_USAGE
    except (UsageError, ParseError) as exc:
        print(f"iterlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionError as exc:
        hint = f" (try --digits {exc.required_digits})" if exc.required_digits else ""
        print(f"iterlab: precision error: {exc}{hint}", file=sys.stderr)
        return EXIT_NUMERIC
    except IterlabError as exc:
        print(f"iterlab: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(text, cfg.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
