"""Command line: ``qpathdim run CONFIG`` and ``qpathdim validate CONFIG``.

Exit codes: 0 success, 1 configuration (or file) error, 2 numeric failure,
130 interrupted (partial results are still written).
"""

from __future__ import annotations

import argparse
import logging
import sys

from ..gaussian_state import NumericRangeError
from ..oracle_grid import GridError
from .config import ConfigurationError, apply_override, load_config, validate_config
from .output import emit_results
from .runner import run_experiment

log = logging.getLogger("qpathdim")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INTERRUPTED = 0, 1, 2, 130


def _build_config(args) -> dict:
    cfg = load_config(args.config)
    for item in args.override or []:
        cfg = apply_override(cfg, item)
    if getattr(args, "seed", None) is not None:
        cfg = apply_override(cfg, f"ensemble.master_seed={args.seed}")
    if getattr(args, "out", None) is not None:
        cfg.setdefault("output", {})["directory"] = args.out
    if getattr(args, "workers", None) is not None:
        cfg["workers"] = args.workers
    return validate_config(cfg)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpathdim", description="Measured quantum-path dimension experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment and write its result table")
    run.add_argument("config", help="YAML config, or a previously emitted .json/.csv result")
    run.add_argument("--override", action="append", metavar="KEY=VALUE",
                     help="set a dotted config key, e.g. schedule.b_scale=0.25 (repeatable)")
    run.add_argument("--seed", type=int, help="ensemble master seed")
    run.add_argument("--out", help="output directory")
    run.add_argument("--workers", type=int, help="worker processes (default: all cores)")
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    val.add_argument("--override", action="append", metavar="KEY=VALUE")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _build_config(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(f"ok: {args.config} ({cfg['mode']})")
        return EXIT_OK
    try:
        table = run_experiment(cfg, workers=cfg.get("workers"))
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericRangeError, GridError, ArithmeticError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not table.rows:
        print("interrupted before any result was produced", file=sys.stderr)
        return EXIT_INTERRUPTED
    try:
        paths = emit_results(table, cfg["output"]["directory"], cfg["output"]["formats"])
    except OSError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    for path in paths:
        print(path)
    if table.summary:
        log.info("summary: %s", table.summary)
    return EXIT_INTERRUPTED if table.partial else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
