"""Command line: ``floydlab {run,check,sweep,levels} CONFIG``.

Exit status: 0 when every identity check passes, 1 when one fails,
2 for an unusable scenario file, 3 when a computation raises.
"""
from __future__ import annotations

import argparse
import os
import sys

from .config import load_scenario
from .errors import ConfigError, FloydlabError
from .report import emit_report
from .runner import run_checks, run_task

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floydlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    helps = {
        "run": "execute the scenario's task and write its table",
        "check": "run the identity suite only",
        "sweep": "run the scenario's E or hbar sweep",
        "levels": "list the symmetric square-well levels",
    }
    for verb, text in helps.items():
        p = sub.add_parser(verb, help=text)
        p.add_argument("config", help="scenario file (key = value text or JSON)")
        p.add_argument("--out", default="floydlab_out", help="output directory (FLOYDLAB_OUT overrides)")
        p.add_argument("--format", choices=("csv", "json", "both"), default="both")
        p.add_argument("--tol-scale", type=_positive_float, default=1.0, help="multiply every check tolerance")
        p.add_argument("--threads", type=_positive_int, default=1, help="worker threads for sweeps")
        p.add_argument("--seed", type=int, default=42, help="seed for the randomized identity draws")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = os.environ.get("FLOYDLAB_OUT") or args.out
    try:
        scn = load_scenario(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.verb == "check":
            report = run_checks(scn, seed=args.seed, tol_scale=args.tol_scale, threads=args.threads)
        else:
            task = {"sweep": "sweep", "levels": "levels"}.get(args.verb)
            if task == "sweep" and scn.sweep_axis is None:
                raise ConfigError(f"{args.config}: the sweep verb needs sweep.axis and sweep values")
            if task == "levels" and scn.potential.kind != "square_well":
                raise ConfigError(f"{args.config}: the levels verb needs potential.kind = square_well")
            report = run_task(scn, args.verb, task=task, tol_scale=args.tol_scale, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloydlabError, ArithmeticError, ValueError) as exc:
        print(f"{scn.name} ({scn.task}): {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    stem = f"{scn.name}.{args.verb}"
    try:
        paths = emit_report(report, args.format, out, stem)
    except OSError as exc:
        print(f"cannot write output to {out}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: error={c.error:.3g} tol={c.tol:.3g}")
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK if report.passed else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
