"""
Detect handler: change point detection on a series read from file or stdin.
"""

import argparse
import logging
import sys
from typing import Optional, TextIO

from config import Config, get_config
from errors import InvalidInputError
from handlers.common import dump_json, read_series
from multiscale import QuantileCache
from noise import Seed
from segmentation import DetectorConfig, Fit, detect
from variance import parse_lrv_spec

logger = logging.getLogger(__name__)

MIN_SERIES_LENGTH = 4
DEFAULT_ALPHA = 0.5


class DetectHandler:
    """Handles the ``detect`` subcommand."""

    def __init__(self, config: Optional[Config] = None, out: TextIO = sys.stdout):
        self.config = config or get_config()
        self.out = out

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="CSV with one value per line, '-' for stdin")
        threshold = parser.add_mutually_exclusive_group()
        threshold.add_argument("--alpha", type=float, help="level; q is calibrated")
        threshold.add_argument("--q", type=float, help="explicit threshold")
        parser.add_argument("--min-scale", type=int, help="smallest tested length")
        parser.add_argument(
            "--lrv", default="block", help="block | iid-diff | fixed:<sigma>"
        )
        parser.add_argument("--block-length", type=int, help="block length k")
        parser.add_argument("--mc-reps", type=int, default=self.config.mc_reps)
        parser.add_argument("--seed", type=int, default=self.config.seed,
                            help="calibration seed")
        parser.add_argument("--cache", type=str,
                            default=str(self.config.quantile_cache_path))
        parser.add_argument("--no-cache", action="store_true")
        parser.add_argument("--json", action="store_true", help="print the fit as JSON")

    def build_detector(self, args: argparse.Namespace) -> DetectorConfig:
        """Translate parsed flags into a detector configuration."""
        method, sigma = parse_lrv_spec(args.lrv)
        alpha = args.alpha
        if alpha is None and args.q is None:
            alpha = DEFAULT_ALPHA
            logger.info(f"No --alpha or --q given, using alpha={alpha}")

        return DetectorConfig(
            alpha=alpha,
            q=args.q,
            min_len=args.min_scale,
            lrv_method=method,
            block_length=args.block_length,
            fixed_sigma=sigma,
            mc_reps=args.mc_reps,
            seed=Seed(args.seed),
            cache=None if args.no_cache else QuantileCache(args.cache),
        )

    def handle_detect(self, args: argparse.Namespace) -> int:
        """Handle ``detect``: print the fit and return the exit code."""
        y = read_series(args.file)
        if len(y) < MIN_SERIES_LENGTH:
            raise InvalidInputError(
                f"need at least {MIN_SERIES_LENGTH} values, got {len(y)}"
            )

        fit = detect(y, self.build_detector(args))
        if args.json:
            dump_json(fit.to_dict(), self.out)
        else:
            self.out.write(self.format_fit(fit))
        return 0

    def format_fit(self, fit: Fit) -> str:
        """Format a fit as readable text."""
        lines = [
            f"K = {fit.k_hat}",
            f"q = {fit.q_used:.6f}" + (f" (alpha = {fit.alpha:g})" if fit.alpha else ""),
            f"sigma = {fit.sigma_used:.6f}",
            f"min_len = {fit.min_len}",
            f"sse = {fit.sse:.6f}",
            "",
            f"{'first':>7} {'last':>7} {'level':>12}   feasible range",
        ]
        for (first, last, level), interval in zip(
            fit.signal.segments(), fit.level_intervals
        ):
            lines.append(
                f"{first:>7} {last:>7} {level:>12.6f}   [{interval.lo:.6f}, {interval.hi:.6f}]"
            )
        return "\n".join(lines) + "\n"
