"""
Turnpike Toolkit command-line entry point.

Run:  python app.py validate --config runs/example.json --out output/
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from cli.commands import EXIT_CONFIG, Command, run
from cli.config_loader import parse_config
from config.logging_setup import configure_logging
from config.settings import settings
from core.errors import ConfigError

logger = logging.getLogger("turnpike")


def parse_grid(text: str) -> Tuple[float, ...]:
    """'a:b:n' → n evenly spaced points from a to b inclusive."""
    try:
        a, b, n = text.split(":")
        start, stop, count = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like a:b:n, got '{text}'") from None
    if count < 1 or start < 0 or stop < start:
        raise argparse.ArgumentTypeError(f"invalid grid '{text}'")
    return tuple(float(v) for v in np.linspace(start, stop, count))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="turnpike",
        description="Dual-control solver for long-horizon utility maximisation and turnpike diagnostics.",
    )
    parser.add_argument("command", choices=[c.value for c in Command], help="What to compute.")
    parser.add_argument("--config", required=True, type=Path, help="JSON run configuration.")
    parser.add_argument("--out", type=Path, default=None, help="Output directory (overrides the config).")
    parser.add_argument("--seed", type=int, default=None, help="Monte Carlo seed (overrides the config).")
    parser.add_argument("--grid-tau", type=parse_grid, default=None, dest="grid_tau", help="Time-to-horizon grid a:b:n.")
    parser.add_argument("--grid-x", type=parse_grid, default=None, dest="grid_x", help="Wealth grid a:b:n.")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, dest="log_level", help="Logging level (default: INFO).")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        config = parse_config(args.config)
    except ConfigError as e:
        logger.error("❌ invalid configuration: %s", e)
        return EXIT_CONFIG

    if args.seed is not None:
        if args.seed < 0:
            logger.error("❌ --seed must be non-negative")
            return EXIT_CONFIG
        config = replace(config, mc=replace(config.mc, seed=args.seed))
    if args.grid_tau is not None:
        config = replace(config, grids=replace(config.grids, tau=args.grid_tau))
    if args.grid_x is not None:
        config = replace(config, grids=replace(config.grids, x=args.grid_x))
    if args.out is not None:
        config = replace(config, output_dir=args.out)

    return run(args.command, config)


if __name__ == "__main__":
    sys.exit(main())
