"""
Bench handler: run a simulation scenario and write its tables.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, TextIO

from config import Config, get_config
from database import ResultStore
from errors import ConfigurationError
from experiments import ScenarioResult, emit_tables, run_scenario
from multiscale import QuantileCache
from scenarios import format_scenarios_list, is_scenario_file, resolve_scenario

logger = logging.getLogger(__name__)

DESK_REPS = 250
FULL_REPS = 1000


class BenchHandler:
    """Handles the ``bench`` subcommand."""

    def __init__(self, config: Optional[Config] = None, out: TextIO = sys.stdout):
        self.config = config or get_config()
        self.out = out

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--scenario", help="builtin name or JSON file")
        parser.add_argument("--reps", type=int, help=f"replicates (default: the file's value, or {DESK_REPS} for builtins)")
        parser.add_argument("--full", action="store_true",
                            help=f"use {FULL_REPS} replicates")
        parser.add_argument("--seed", type=int, help="replicate seed (scenario default)")
        parser.add_argument("--mc-reps", type=int, default=self.config.mc_reps)
        parser.add_argument("--out", type=Path, default=Path("./bench_out"))
        parser.add_argument("--workers", type=int, default=self.config.workers)
        parser.add_argument("--cache", type=str,
                            default=str(self.config.quantile_cache_path))
        parser.add_argument("--no-cache", action="store_true")
        parser.add_argument("--db", type=Path, help="record the run in this SQLite file")
        parser.add_argument("--list", action="store_true", help="list builtin scenarios")
        parser.add_argument("--history", action="store_true",
                            help="list recent runs from the results database")

    def _store(self, args: argparse.Namespace) -> Optional[ResultStore]:
        if args.db is not None:
            return ResultStore(args.db)
        if self.config.results_db_explicit:
            return ResultStore(self.config.results_db_path)
        return None

    def handle_bench(self, args: argparse.Namespace) -> int:
        """Handle ``bench``: run the scenario, write CSVs, print their paths."""
        if args.list:
            self.out.write(format_scenarios_list() + "\n")
            return 0
        if args.history:
            return self.show_history(args)
        if not args.scenario:
            raise ConfigurationError("--scenario is required")
        if args.reps is not None and args.full:
            raise ConfigurationError("--reps and --full are mutually exclusive")

        reps = self._reps(args)
        scenario = resolve_scenario(
            args.scenario,
            reps=reps,
            seed=args.seed,
            mc_reps=args.mc_reps,
            burn_in=self.config.burn_in,
            mc_seed=self.config.seed,
        )
        cache = None if args.no_cache else QuantileCache(args.cache)

        store = self._store(args)
        run_id = None
        if store is not None:
            run_id = store.create_run(
                scenario.name, scenario.seed.base, scenario.reps, str(args.out)
            )

        try:
            result = run_scenario(
                scenario,
                workers=args.workers,
                cache=cache,
                progress=self._show_progress(args),
                hist_bin_width=self.config.hist_bin_width,
            )
            paths = emit_tables(result, args.out)
            if store is not None:
                store.record_replicates(run_id, result.records)
        except Exception as e:
            if store is not None:
                store.update_run_status(run_id, "failed", error_message=str(e))
            raise

        if store is not None:
            store.update_run_status(run_id, "completed")
            logger.info(f"Recorded run #{run_id} in {store.db_path}")

        self.out.write(self.format_result(result))
        for path in paths:
            self.out.write(f"{path}\n")
        return 0

    def show_history(self, args: argparse.Namespace) -> int:
        store = self._store(args)
        if store is None:
            raise ConfigurationError("--history needs --db or DEPSMUCE_RESULTS_DB")

        runs = store.get_recent_runs()
        if not runs:
            self.out.write("No recorded runs.\n")
            return 0
        for run in runs:
            self.out.write(
                f"#{run['id']:<4} {run['scenario']:<10} reps={run['reps']:<5} "
                f"seed={run['seed']:<6} {run['status']:<10} {run['created_at']}\n"
            )
        return 0

    def _reps(self, args: argparse.Namespace) -> Optional[int]:
        """Replicate count: flags first, then a scenario file's own value."""
        if args.full:
            return FULL_REPS
        if args.reps is not None:
            return args.reps
        if is_scenario_file(args.scenario):
            return None
        return DESK_REPS

    def _show_progress(self, args: argparse.Namespace) -> bool:
        quiet = getattr(args, "quiet", False)
        return not quiet and sys.stderr.isatty()

    def format_result(self, result: ScenarioResult) -> str:
        """Format the correct-K proportions and errors per cell."""
        lines = [f"{result.scenario}: K* = {result.k_true}"]
        for cell in result.cells:
            lines.append(
                f"  {cell.label:<16} P(K=K*)={cell.distribution['0']:.3f} "
                f"|K-K*|={cell.mean_abs_kdiff:.3f} MSE={cell.mse:.3f} "
                f"MAE={cell.mae:.3f} q={cell.q:.3f}"
                + (f" failed={cell.failed}" if cell.failed else "")
            )
        return "\n".join(lines) + "\n"
