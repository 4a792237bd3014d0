"""Command-line entry point.

    nhsq run <experiment> [--config PATH] [--seed N] [--depth N]
                          [--alpha LIST] [--out DIR] [--svg]
    nhsq list
    nhsq validate-config PATH

Exit codes: 0 all verdicts pass, 1 any verdict fails, 2 usage or config
error.  NHSQ_OUT overrides the output directory; explicit --out wins over
both the environment and the config file.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import NhsqError
from .experiments import ExperimentConfig, list_experiments, run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhsq", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="run a named experiment")
    p_run.add_argument("experiment")
    p_run.add_argument("--config", default=None, help="JSON config file (flat keys)")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--depth", type=int, default=None)
    p_run.add_argument("--alpha", default=None, help="comma-separated apertures")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--svg", action="store_true")

    sub.add_parser("list", help="list available experiments")

    p_val = sub.add_parser("validate-config", help="check a config file")
    p_val.add_argument("path")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    cfg.experiment = args.experiment
    # Precedence: CLI flag > NHSQ_OUT > config file value.
    if args.seed is not None:
        cfg.seed = args.seed
    if args.depth is not None:
        cfg.N = args.depth
    if args.alpha is not None:
        cfg.alphas = tuple(float(a) for a in args.alpha.split(","))
    env_out = os.environ.get("NHSQ_OUT")
    if env_out:
        cfg.out_dir = env_out
    if args.out is not None:
        cfg.out_dir = args.out
    if args.svg:
        cfg.svg = True
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "list":
            for name in list_experiments():
                print(name)
            return 0
        if args.command == "validate-config":
            ExperimentConfig.from_file(args.path)
            print(f"{args.path}: ok")
            return 0
        cfg = _config_from_args(args)
        report = run(cfg)
        out_dir = Path(cfg.out_dir) / cfg.experiment
        paths = report.write(out_dir, svg=cfg.svg)
        for v in report.verdicts:
            status = "PASS" if v.passed else "FAIL"
            print(f"[{status}] criterion {v.criterion}: {v.detail}")
        for key, val in sorted(report.metrics.items()):
            print(f"  {key} = {val}")
        for p in paths:
            print(f"wrote {p}")
        print(f"runtime: {report.runtime_seconds:.2f}s")
        return 0 if report.all_passed else 1
    except NhsqError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
