"""
Quantile handler: Monte-Carlo calibration of the threshold q.
"""

import argparse
import sys
from typing import Optional, TextIO

from config import Config, get_config
from errors import ConfigurationError
from multiscale import QuantileCache, default_min_len, mc_quantile
from noise import Seed


class QuantileHandler:
    """Handles the ``quantile`` subcommand."""

    def __init__(self, config: Optional[Config] = None, out: TextIO = sys.stdout):
        self.config = config or get_config()
        self.out = out

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--n", type=int, required=True, help="sample count")
        parser.add_argument("--min-scale", type=int, help="smallest tested length")
        parser.add_argument("--alpha", type=float, required=True)
        parser.add_argument("--mc-reps", type=int, default=self.config.mc_reps)
        parser.add_argument("--seed", type=int, default=self.config.seed)
        parser.add_argument("--cache", type=str,
                            default=str(self.config.quantile_cache_path))
        parser.add_argument("--no-cache", action="store_true")

    def handle_quantile(self, args: argparse.Namespace) -> int:
        """Handle ``quantile``: print the calibrated threshold."""
        if args.n < 1:
            raise ConfigurationError(f"--n must be >= 1, got {args.n}")
        min_len = args.min_scale if args.min_scale is not None else default_min_len(args.n)
        cache = None if args.no_cache else QuantileCache(args.cache)
        q = mc_quantile(args.n, min_len, args.alpha, args.mc_reps, Seed(args.seed), cache)
        self.out.write(f"{q!r}\n")
        return 0
