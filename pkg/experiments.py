"""
Replication harness for simulation studies.

A scenario fixes a true step signal, an error process and a set of detector
variants and levels. Every replicate draws its own error stream, runs each
(variant, level) detector, and records the estimated number and locations of
change points together with the estimation error. Aggregates are reduced in
replicate order, so results do not depend on how replicates are scheduled.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from errors import ConfigurationError, DepSmuceError
from multiscale import QuantileCache, ScaleConfig, default_min_len, mc_quantile
from noise import DEFAULT_BURN_IN, NoiseModel, Seed, generate, oracle_lrv
from segmentation import segment
from step_signal import StepSignal, cp_distance, signal_distance
from variance import LrvEstimate, estimate_lrv, fixed_lrv, parse_lrv_spec

logger = logging.getLogger(__name__)

KDIFF_BINS = ("<=-3", "-2", "-1", "0", "+1", "+2", ">=+3")
DEFAULT_MC_SEED = 20240101
DEFAULT_HIST_BIN_WIDTH = 10


class ReplicateStatus(Enum):
    """Outcome of one detector run inside a replicate."""

    COMPLETED = "completed"
    FAILED = "failed"


@dataclass(frozen=True)
class DetectorVariant:
    """
    One detector flavour of a scenario.

    ``lrv`` is "block", "iid-diff", "fixed:<sigma>" or "oracle" (the true
    long-run standard deviation of the scenario's error process).
    """

    name: str
    lrv: str = "block"
    block_length: Optional[int] = None
    min_len: Optional[int] = None

    def __post_init__(self) -> None:
        if self.lrv != "oracle":
            parse_lrv_spec(self.lrv)
        if self.block_length is not None and self.block_length < 1:
            raise ConfigurationError(f"block_length must be >= 1, got {self.block_length}")
        if self.min_len is not None and self.min_len < 1:
            raise ConfigurationError(f"min_len must be >= 1, got {self.min_len}")

    def resolve_min_len(self, n: int) -> int:
        return self.min_len if self.min_len is not None else default_min_len(n)

    def estimate(self, y: np.ndarray, noise: NoiseModel) -> LrvEstimate:
        """Long-run variance as this variant sees it."""
        if self.lrv == "oracle":
            return fixed_lrv(math.sqrt(oracle_lrv(noise)))
        method, sigma = parse_lrv_spec(self.lrv)
        return estimate_lrv(y, method, self.block_length, sigma)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lrv": self.lrv,
            "block_length": self.block_length,
            "min_len": self.min_len,
        }


@dataclass(frozen=True)
class Scenario:
    """A simulation setting: truth, errors, detectors, levels and replication."""

    name: str
    n: int
    truth: StepSignal
    noise: NoiseModel
    alphas: Tuple[float, ...] = (0.1, 0.5, 0.9)
    variants: Tuple[DetectorVariant, ...] = ()
    reps: int = 250
    seed: Seed = field(default_factory=lambda: Seed(0))
    mc_reps: int = 10000
    mc_seed: Seed = field(default_factory=lambda: Seed(DEFAULT_MC_SEED))
    burn_in: int = DEFAULT_BURN_IN
    description: str = ""
    # Published proportion of correctly estimated change point counts per cell
    reference: Dict[str, Dict[str, float]] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "variants", tuple(self.variants))
        if self.reps < 1:
            raise ConfigurationError(f"reps must be >= 1, got {self.reps}")
        if not all(0 < a < 1 for a in self.alphas) or not self.alphas:
            raise ConfigurationError(f"alphas must lie in (0, 1): {self.alphas}")
        if not self.variants:
            raise ConfigurationError(f"scenario {self.name} has no detector variants")
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate variant names: {names}")
        self.truth.check_length(self.n)

    @property
    def k_true(self) -> int:
        return self.truth.k


@dataclass(frozen=True)
class ReplicateRecord:
    """Result of one (replicate, variant, alpha) detector run."""

    rep: int
    variant: str
    alpha: float
    status: ReplicateStatus
    k_hat: Optional[int] = None
    breaks: Tuple[int, ...] = ()
    mse: Optional[float] = None
    mae: Optional[float] = None
    cp_distance: Optional[float] = None
    sigma: Optional[float] = None
    q: Optional[float] = None
    error_message: Optional[str] = None


@dataclass(frozen=True)
class CellSummary:
    """Aggregates of one (variant, alpha) cell."""

    variant: str
    alpha: float
    q: float
    distribution: Dict[str, float]
    mean_abs_kdiff: float
    mse: float
    mae: float
    median_cp_distance: float
    histogram: Tuple[int, ...]
    completed: int
    failed: int

    @property
    def label(self) -> str:
        return cell_label(self.variant, self.alpha)


@dataclass(frozen=True)
class ScenarioResult:
    """Per-replicate records and per-cell aggregates of a scenario run."""

    scenario: str
    n: int
    k_true: int
    hist_bin_width: int
    cells: Tuple[CellSummary, ...]
    records: Tuple[ReplicateRecord, ...]

    def cell(self, variant: str, alpha: float) -> CellSummary:
        for summary in self.cells:
            if summary.variant == variant and summary.alpha == alpha:
                return summary
        raise KeyError(cell_label(variant, alpha))

    def histogram_edges(self) -> np.ndarray:
        return histogram_edges(self.n, self.hist_bin_width)


def cell_label(variant: str, alpha: float) -> str:
    return f"{variant}({alpha:g})"


def kdiff_bin(kdiff: int) -> str:
    """Table column of a K-difference; tails are pooled at +-3."""
    if kdiff <= -3:
        return KDIFF_BINS[0]
    if kdiff >= 3:
        return KDIFF_BINS[-1]
    return {-2: "-2", -1: "-1", 0: "0", 1: "+1", 2: "+2"}[kdiff]


def histogram_edges(n: int, width: int) -> np.ndarray:
    """Bin edges over sample indices 1..n; bin b covers [edge_b, edge_{b+1})."""
    edges = np.arange(1, n + 1, width)
    return np.r_[edges, n + 1]


def _mean(values: List[float]) -> float:
    return float(np.mean(values)) if values else math.nan


def simulate_replicate(scenario: Scenario, rep: int) -> np.ndarray:
    """The exact series replicate ``rep`` of the scenario observes."""
    noise = generate(
        scenario.noise, scenario.n, scenario.seed.with_stream(rep), scenario.burn_in
    )
    return scenario.truth.sample(scenario.n) + noise


def calibrate(
    scenario: Scenario, cache: Optional[QuantileCache] = None
) -> Dict[Tuple[str, float], float]:
    """Threshold for every (variant, alpha) cell."""
    thresholds = {}
    for variant in scenario.variants:
        min_len = variant.resolve_min_len(scenario.n)
        for alpha in scenario.alphas:
            thresholds[(variant.name, alpha)] = mc_quantile(
                scenario.n, min_len, alpha, scenario.mc_reps, scenario.mc_seed, cache
            )
    return thresholds


def run_replicate(
    scenario: Scenario, rep: int, thresholds: Dict[Tuple[str, float], float]
) -> List[ReplicateRecord]:
    """Run every detector cell on one replicate; failures become records."""
    y = simulate_replicate(scenario, rep)
    n = scenario.n
    records = []

    for variant in scenario.variants:
        lrv: Optional[LrvEstimate] = None
        lrv_error: Optional[str] = None
        try:
            lrv = variant.estimate(y, scenario.noise)
        except DepSmuceError as e:
            lrv_error = str(e)

        for alpha in scenario.alphas:
            q = thresholds[(variant.name, alpha)]
            if lrv is None:
                records.append(
                    ReplicateRecord(rep, variant.name, alpha, ReplicateStatus.FAILED,
                                    q=q, error_message=lrv_error)
                )
                continue
            try:
                cfg = ScaleConfig(n, variant.resolve_min_len(n), q, lrv.sigma_star)
                fit = segment(y, cfg)
            except DepSmuceError as e:
                logger.debug(f"Replicate {rep} {cell_label(variant.name, alpha)}: {e}")
                records.append(
                    ReplicateRecord(rep, variant.name, alpha, ReplicateStatus.FAILED,
                                    sigma=lrv.sigma_star, q=q, error_message=str(e))
                )
                continue

            mse, mae = signal_distance(scenario.truth, fit.signal, n)
            distance = (
                cp_distance(scenario.truth, fit.signal, n) if scenario.k_true else math.nan
            )
            records.append(
                ReplicateRecord(
                    rep=rep,
                    variant=variant.name,
                    alpha=alpha,
                    status=ReplicateStatus.COMPLETED,
                    k_hat=fit.k_hat,
                    breaks=fit.breaks,
                    mse=mse,
                    mae=mae,
                    cp_distance=distance,
                    sigma=lrv.sigma_star,
                    q=q,
                )
            )
    return records


def summarize(
    scenario: Scenario,
    records: Iterable[ReplicateRecord],
    thresholds: Dict[Tuple[str, float], float],
    hist_bin_width: int = DEFAULT_HIST_BIN_WIDTH,
) -> ScenarioResult:
    """Reduce records (in replicate order) into per-cell aggregates."""
    records = tuple(sorted(records, key=lambda r: r.rep))
    edges = histogram_edges(scenario.n, hist_bin_width)
    cells = []

    for variant in scenario.variants:
        for alpha in scenario.alphas:
            cell_records = [
                r for r in records if r.variant == variant.name and r.alpha == alpha
            ]
            done = [r for r in cell_records if r.status is ReplicateStatus.COMPLETED]
            failed = len(cell_records) - len(done)

            counts = dict.fromkeys(KDIFF_BINS, 0)
            for r in done:
                counts[kdiff_bin(r.k_hat - scenario.k_true)] += 1
            total = len(done)
            if total == 0:
                logger.warning(f"No completed replicates for {cell_label(variant.name, alpha)}")
                distribution = {b: math.nan for b in KDIFF_BINS}
            else:
                distribution = {b: c / total for b, c in counts.items()}

            all_breaks = [b for r in done for b in r.breaks]
            histogram, _ = np.histogram(all_breaks, bins=edges)

            cells.append(
                CellSummary(
                    variant=variant.name,
                    alpha=alpha,
                    q=thresholds[(variant.name, alpha)],
                    distribution=distribution,
                    mean_abs_kdiff=_mean([abs(r.k_hat - scenario.k_true) for r in done]),
                    mse=_mean([r.mse for r in done]),
                    mae=_mean([r.mae for r in done]),
                    median_cp_distance=(
                        float(np.median([r.cp_distance for r in done])) if done else math.nan
                    ),
                    histogram=tuple(int(c) for c in histogram),
                    completed=total,
                    failed=failed,
                )
            )

    return ScenarioResult(
        scenario=scenario.name,
        n=scenario.n,
        k_true=scenario.k_true,
        hist_bin_width=hist_bin_width,
        cells=tuple(cells),
        records=records,
    )


def run_scenario(
    scenario: Scenario,
    workers: int = 1,
    cache: Optional[QuantileCache] = None,
    progress: bool = False,
    hist_bin_width: int = DEFAULT_HIST_BIN_WIDTH,
) -> ScenarioResult:
    """
    Run all replicates of a scenario and aggregate them.

    Args:
        scenario: Scenario to run
        workers: Number of worker processes (1 runs in-process)
        cache: Optional quantile cache for calibration
        progress: Show a progress bar on standard error
        hist_bin_width: Width of the break location histogram bins

    Returns:
        ScenarioResult
    """
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}")
    if hist_bin_width < 1:
        raise ConfigurationError(f"hist_bin_width must be >= 1, got {hist_bin_width}")

    logger.info(
        f"Running scenario {scenario.name}: n={scenario.n}, reps={scenario.reps}, "
        f"{len(scenario.variants)} variants x {len(scenario.alphas)} levels"
    )
    thresholds = calibrate(scenario, cache)
    task = partial(run_replicate, scenario, thresholds=thresholds)
    reps = range(scenario.reps)

    records: List[ReplicateRecord] = []
    if workers == 1:
        batches = map(task, reps)
        for batch in tqdm(batches, total=scenario.reps, disable=not progress,
                          desc=scenario.name, unit="rep"):
            records.extend(batch)
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            # map yields in submission order regardless of completion order
            batches = executor.map(task, reps, chunksize=max(1, scenario.reps // (4 * workers)))
            for batch in tqdm(batches, total=scenario.reps, disable=not progress,
                              desc=scenario.name, unit="rep"):
                records.extend(batch)

    result = summarize(scenario, records, thresholds, hist_bin_width)
    _log_against_reference(scenario, result)
    return result


def _log_against_reference(scenario: Scenario, result: ScenarioResult) -> None:
    for summary in result.cells:
        measured = {
            "p_correct": summary.distribution["0"],
            "mean_abs_kdiff": summary.mean_abs_kdiff,
            "mse": summary.mse,
            "mae": summary.mae,
        }
        published = scenario.reference.get(summary.label, {})
        parts = []
        for metric, value in measured.items():
            part = f"{metric}={value:.3f}"
            if metric in published:
                part += f" (published {published[metric]:.3f})"
            parts.append(part)
        logger.info(f"{scenario.name} {summary.label}: " + ", ".join(parts))


def distribution_frame(result: ScenarioResult) -> pd.DataFrame:
    """One row per variant and alpha: binned frequencies of K_hat - K*."""
    rows = [
        {"variant": c.variant, "alpha": c.alpha, **c.distribution} for c in result.cells
    ]
    return pd.DataFrame(rows, columns=["variant", "alpha", *KDIFF_BINS])


def summary_frame(result: ScenarioResult) -> pd.DataFrame:
    rows = [
        {
            "variant": c.variant,
            "alpha": c.alpha,
            "mean_abs_kdiff": c.mean_abs_kdiff,
            "mse": c.mse,
            "mae": c.mae,
            "median_cp_distance": c.median_cp_distance,
        }
        for c in result.cells
    ]
    return pd.DataFrame(
        rows,
        columns=["variant", "alpha", "mean_abs_kdiff", "mse", "mae", "median_cp_distance"],
    )


def histogram_frame(result: ScenarioResult) -> pd.DataFrame:
    edges = result.histogram_edges()
    rows = []
    for c in result.cells:
        for b, count in enumerate(c.histogram):
            rows.append(
                {
                    "variant": c.variant,
                    "alpha": c.alpha,
                    "bin_start": int(edges[b]),
                    "bin_end": int(edges[b + 1]) - 1,
                    "count": count,
                }
            )
    return pd.DataFrame(rows, columns=["variant", "alpha", "bin_start", "bin_end", "count"])


def emit_tables(result: ScenarioResult, path: Path) -> List[Path]:
    """
    Write the distribution, summary and histogram tables as CSV.

    Returns:
        Paths of the written files
    """
    out_dir = Path(path)
    out_dir.mkdir(parents=True, exist_ok=True)

    frames = {
        "distribution": distribution_frame(result),
        "summary": summary_frame(result),
        "histogram": histogram_frame(result),
    }
    written = []
    for kind, frame in frames.items():
        target = out_dir / f"{result.scenario}_{kind}.csv"
        frame.to_csv(target, index=False, encoding="utf-8")
        written.append(target)
        logger.info(f"Wrote {target}")
    return written
