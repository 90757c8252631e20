"""
Simulate handler: print the series a benchmark replicate observes.
"""

import argparse
import sys
from typing import Optional, TextIO

from config import Config, get_config
from errors import ConfigurationError
from experiments import simulate_replicate
from handlers.common import write_series
from scenarios import resolve_scenario


class SimulateHandler:
    """Handles the ``simulate`` subcommand."""

    def __init__(self, config: Optional[Config] = None, out: TextIO = sys.stdout):
        self.config = config or get_config()
        self.out = out

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--scenario", required=True, help="builtin name or JSON file")
        parser.add_argument("--rep", type=int, default=0, help="replicate index")
        parser.add_argument("--seed", type=int, help="replicate seed (scenario default)")

    def handle_simulate(self, args: argparse.Namespace) -> int:
        """Handle ``simulate``: write signal plus noise, one value per line."""
        if args.rep < 0:
            raise ConfigurationError(f"--rep must be >= 0, got {args.rep}")
        scenario = resolve_scenario(
            args.scenario, seed=args.seed, burn_in=self.config.burn_in
        )
        write_series(simulate_replicate(scenario, args.rep), self.out)
        return 0
