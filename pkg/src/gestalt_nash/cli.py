"""Command-line entry point.

Exit codes: 0 converged and verified, 1 bad input, 2 no convergence,
3 verification failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from .game import validate_game
from .report import emit_report, run_scenario
from .scenarios import (
    BUILTINS,
    ConfigError,
    ScenarioError,
    build_scenario,
    builtin_config,
    load_config,
)

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_NOT_VERIFIED = 0, 1, 2, 3


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--quiet", action="store_true")

    ap = argparse.ArgumentParser(
        prog="gestalt-nash",
        description="Equilibria of security-investment games with limited attention.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", parents=[common], help="solve a scenario config")
    solve.add_argument("config", type=Path)
    solve.add_argument("--trace", action="store_true", help="write per-iteration CSV traces")
    solve.add_argument("--format", choices=("json", "csv"), default="json",
                       help="format of the summary printed to stdout")
    solve.add_argument("--seed", type=int, help="override rng_seed of the config")
    solve.add_argument("--threads", type=int, help="worker threads (default: all cores)")

    sc = sub.add_parser("scenario", parents=[common], help="print a built-in config")
    sc.add_argument("name", choices=sorted(BUILTINS))

    val = sub.add_parser("validate", parents=[common], help="check a config's game")
    val.add_argument("config", type=Path)
    return ap


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def _stdout_summary(report, fmt):
    o = report.outcome
    if fmt == "json":
        return json.dumps({
            "converged": o.converged,
            "verified": report.verification.ok,
            "rounds": o.rounds_used,
            "u_star": o.u_star.tolist(),
            "critical_set": report.phenomena.as_dict()["critical_set"],
            "wall_time_s": round(report.wall_time, 6),
        }, indent=2)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["agent", "u", "alpha", "rbp"])
    for i, (u, a, l) in enumerate(zip(o.u_star, o.alphas, o.rbp)):
        w.writerow([i + 1, f"{u:.12g}", f"{a:.12g}", f"{l:.12g}"])
    return buf.getvalue().rstrip("\n")


def _solve(args):
    spec = load_config(args.config)
    report = run_scenario(spec, seed=args.seed, threads=args.threads)
    if args.out is not None:
        emit_report(report, args.out, trace=args.trace)
    if not args.quiet:
        print(_stdout_summary(report, args.format))
    if not report.outcome.converged:
        _err(f"no convergence after {report.outcome.rounds_used} rounds")
        return EXIT_NOT_CONVERGED
    if not report.verification.ok:
        for v in report.verification.violations[:10]:
            _err(v)
        return EXIT_NOT_VERIFIED
    return EXIT_OK


def _scenario(args):
    text = json.dumps(builtin_config(args.name), indent=2) + "\n"
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / f"{args.name}.json"
        path.write_text(text, encoding="utf-8")
        if not args.quiet:
            print(path)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _validate(args):
    spec = load_config(args.config)
    game, _ = build_scenario(spec, validate=False)
    report = validate_game(game)
    if report.ok:
        if not args.quiet:
            print("ok")
        return EXIT_OK
    for v in report.violations:
        _err(v)
    return EXIT_INPUT


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"solve": _solve, "scenario": _scenario, "validate": _validate}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        _err(f"{getattr(args, 'config', '')}: {exc}")
    except ScenarioError as exc:
        _err(str(exc))
    except (OSError, ValueError) as exc:
        _err(str(exc))
    return EXIT_INPUT


run_cli = main

if __name__ == "__main__":
    sys.exit(main())
