"""Shared plumbing for the experiment scripts: load a config, run, emit, summarise."""

import argparse
from pathlib import Path

from qpathdim.experiments.config import apply_override, load_config
from qpathdim.experiments.output import emit_results
from qpathdim.experiments.runner import run_experiment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run_config(name: str, description: str):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default="results")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    args = p.parse_args()
    cfg = load_config(CONFIGS / name)
    for item in args.override:
        cfg = apply_override(cfg, item)
    table = run_experiment(cfg)
    for path in emit_results(table, args.out, ("csv", "json")):
        print("wrote", path)
    return table
