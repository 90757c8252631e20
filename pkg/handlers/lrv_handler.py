"""
LRV handler: long-run variance estimate of a series.
"""

import argparse
import sys
from typing import Optional, TextIO

from config import Config, get_config
from handlers.common import dump_json, read_series
from variance import LrvMethod, estimate_lrv

METHODS = {"block": LrvMethod.BLOCK_DIFF, "iid-diff": LrvMethod.IID_DIFF}


class LrvHandler:
    """Handles the ``lrv`` subcommand."""

    def __init__(self, config: Optional[Config] = None, out: TextIO = sys.stdout):
        self.config = config or get_config()
        self.out = out

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("file", help="CSV with one value per line, '-' for stdin")
        parser.add_argument("--method", choices=sorted(METHODS), default="block")
        parser.add_argument("--block-length", type=int, help="block length k")

    def handle_lrv(self, args: argparse.Namespace) -> int:
        """Handle ``lrv``: print the estimate as JSON."""
        y = read_series(args.file)
        estimate = estimate_lrv(y, METHODS[args.method], args.block_length)
        dump_json(estimate.to_dict(), self.out)
        return 0
