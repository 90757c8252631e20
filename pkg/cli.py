"""
Command-line entry point for DepSMUCE change point detection.

Subcommands:
- detect: segment a series read from a CSV file or stdin
- quantile: calibrate the threshold q by Monte Carlo
- lrv: estimate the long-run variance of a series
- bench: run a simulation scenario and write its tables
- simulate: print the series a benchmark replicate observes

Exit codes: 0 success, 2 malformed input, 3 degenerate data,
4 invalid flags or configuration, 5 unknown scenario.
"""

import argparse
import logging
import sys
from typing import List, NoReturn, Optional, TextIO

from config import Config, get_config
from errors import ConfigurationError, DepSmuceError
from handlers.bench_handler import BenchHandler
from handlers.detect_handler import DetectHandler
from handlers.lrv_handler import LrvHandler
from handlers.quantile_handler import QuantileHandler
from handlers.simulate_handler import SimulateHandler

logger = logging.getLogger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Parser that reports flag errors as configuration errors (exit 4)."""

    def error(self, message: str) -> NoReturn:
        raise ConfigurationError(f"{self.prog}: {message}")


class DepSmuceCli:
    """Main command-line application."""

    def __init__(
        self,
        config: Optional[Config] = None,
        out: TextIO = sys.stdout,
        err: TextIO = sys.stderr,
    ):
        self.config = config
        self.out = out
        self.err = err

    def _init_handlers(self) -> None:
        """Initialize handlers once the configuration is known."""
        if self.config is None:
            self.config = get_config()
        self.detect_handler = DetectHandler(self.config, self.out)
        self.quantile_handler = QuantileHandler(self.config, self.out)
        self.lrv_handler = LrvHandler(self.config, self.out)
        self.bench_handler = BenchHandler(self.config, self.out)
        self.simulate_handler = SimulateHandler(self.config, self.out)

    def build_parser(self) -> argparse.ArgumentParser:
        """Build the parser and register all subcommand handlers."""
        parser = _ArgumentParser(
            prog="depsmuce",
            description="Multiscale change point detection for dependent data.",
        )
        verbosity = parser.add_mutually_exclusive_group()
        verbosity.add_argument("-v", "--verbose", action="store_true")
        verbosity.add_argument("-q", "--quiet", action="store_true")

        subparsers = parser.add_subparsers(dest="command", required=True)
        self._register_handlers(subparsers)
        return parser

    def _register_handlers(self, subparsers) -> None:
        """Register all subcommand handlers."""
        handlers = [
            ("detect", "detect change points in a series",
             self.detect_handler, self.detect_handler.handle_detect),
            ("quantile", "calibrate the threshold q",
             self.quantile_handler, self.quantile_handler.handle_quantile),
            ("lrv", "estimate the long-run variance",
             self.lrv_handler, self.lrv_handler.handle_lrv),
            ("bench", "run a simulation scenario",
             self.bench_handler, self.bench_handler.handle_bench),
            ("simulate", "print a replicate's series",
             self.simulate_handler, self.simulate_handler.handle_simulate),
        ]
        for name, help_text, handler, callback in handlers:
            sub = subparsers.add_parser(name, help=help_text)
            handler.add_arguments(sub)
            sub.set_defaults(handler=callback)

    def _configure_logging(self, args: argparse.Namespace) -> None:
        level = self.config.log_level
        if args.verbose:
            level = "DEBUG"
        elif args.quiet:
            level = "WARNING"
        logging.basicConfig(
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            level=getattr(logging, level, logging.INFO),
            stream=self.err,
        )
        logging.getLogger().setLevel(getattr(logging, level, logging.INFO))

    def handle_error(self, error: DepSmuceError) -> int:
        """Report an error on stderr and map it to an exit code."""
        logger.debug("Command failed", exc_info=error)
        self.err.write(f"depsmuce: error: {error}\n")
        return error.exit_code

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Run one command and return its exit code."""
        try:
            self._init_handlers()
            args = self.build_parser().parse_args(argv)
            self._configure_logging(args)
            return args.handler(args)
        except DepSmuceError as e:
            return self.handle_error(e)
        except KeyboardInterrupt:
            self.err.write("\nInterrupted\n")
            return 130


def main() -> None:
    """Main entry point."""
    sys.exit(DepSmuceCli().run())


if __name__ == "__main__":
    main()
