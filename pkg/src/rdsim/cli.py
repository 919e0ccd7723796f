"""``rdsim`` command line.

    rdsim pendulum   [--config F] [--seed S] [--dynamics] [--workers W] [--out P] [--format csv|json]
    rdsim spinchain  [--config F] [--seed S] [--out P] [--format csv|json]
    rdsim born       [--config F] [--seed S] [--out P] [--format csv|json]
    rdsim verify-all [--seed S] [--workers W] [--out P] [--format csv|json]

Exit status: 0 success, 2 invalid configuration, 3 a check failed.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import backend
from .config import ConfigError, load_config, parse_config
from .experiments import RUNNERS, run_verify_all
from .report import build_report, render, utc_now

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = 0
    if v < 1:
        raise argparse.ArgumentTypeError(f"workers must be a positive integer, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rdsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, help="override the config seed (u64)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), help="report format (default json)")
    common.add_argument("--workers", type=_positive, default=1,
                        help="threads for trial execution; results do not depend on it")
    for kind in RUNNERS:
        p = sub.add_parser(kind, parents=[common], help=f"run a {kind} experiment")
        p.add_argument("--config", help="JSON experiment file (or a previous report)")
        if kind == "pendulum":
            p.add_argument("--dynamics", action="store_true",
                           help="classify trials by integrating the equations of motion")
    sub.add_parser("verify-all", parents=[common], help="run every acceptance criterion")
    return parser


def _emit(report: dict, out: str | None, fmt: str):
    text = render(report, fmt)
    if out:
        Path(out).write_text(text, newline="")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = utc_now()
    t0 = time.perf_counter()
    if args.command == "verify-all":
        seed = 42 if args.seed is None else args.seed
        results, checks, times = run_verify_all(
            seed, args.workers, echo=lambda line: print(line, file=sys.stderr))
        stamp = {"started_utc": started, "wall_time_s": time.perf_counter() - t0,
                 "backend": backend.NAME, "criteria": times}
        report = build_report("verify-all", {"kind": "verify-all", "seed": seed}, results, checks,
                              stamp)
        _emit(report, args.out, args.format or "json")
        return EXIT_OK if report["passed"] else EXIT_FAILED

    try:
        if args.config:
            cfg = load_config(args.config, args.command)
        else:
            cfg = parse_config({"kind": args.command}, args.command)
        if args.seed is not None:
            cfg = parse_config({**cfg.echo(), "seed": args.seed}, args.command)
        if getattr(args, "dynamics", False):
            cfg = parse_config({**cfg.echo(), "parameters": {**cfg.parameters, "mode": "dynamics"}},
                               args.command)
    except ConfigError as exc:
        print(f"rdsim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID

    results, checks = RUNNERS[cfg.kind](cfg, args.workers)
    stamp = {"started_utc": started, "wall_time_s": time.perf_counter() - t0,
             "backend": backend.NAME}
    report = build_report(cfg.kind, cfg.echo(), results, checks, stamp)
    _emit(report, args.out or cfg.output_path, args.format or cfg.output_format)
    failed = [c["name"] for c in checks if not c["passed"]]
    if failed:
        print(f"rdsim: failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
