"""
Minimal-jump step function fitting under the multiscale acceptance region.

The estimator first finds the smallest number of change points for which some
step function passes the multiscale test, then picks, among all passing step
functions with that many change points, the one with the smallest residual sum
of squares.

Both steps run as dynamic programs over one sweep of right endpoints j that
maintains, for every start i, the feasible level interval I(i, j) of the piece
[i, j]: the intersection of the constraint intervals of all tested
sub-intervals of [i, j].
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigurationError, DegenerateDataError, InvalidInputError
from multiscale import (
    QuantileCache,
    ScaleConfig,
    ValueInterval,
    constraint_interval,
    default_min_len,
    half_widths,
    mc_quantile,
    v_stat,
)
from noise import Seed
from step_signal import StepSignal
from variance import LrvEstimate, LrvMethod, estimate_lrv, fixed_lrv

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_N = 16

# Relative slack under which two residual sums count as tied
TIE_TOL = 1e-10

SweepVisitor = Callable[[int, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class DetectorConfig:
    """How sigma and q are resolved before segmenting a series."""

    alpha: Optional[float] = None
    q: Optional[float] = None
    min_len: Optional[int] = None
    lrv_method: LrvMethod = LrvMethod.BLOCK_DIFF
    block_length: Optional[int] = None
    fixed_sigma: Optional[float] = None
    mc_reps: int = 10000
    seed: Seed = field(default_factory=lambda: Seed(20240101))
    cache: Optional[QuantileCache] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.alpha is not None and self.q is not None:
            raise ConfigurationError("give either alpha or q, not both")
        if self.alpha is None and self.q is None:
            raise ConfigurationError("threshold unresolved: give alpha or q")
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.min_len is not None and self.min_len < 1:
            raise ConfigurationError(f"min_len must be >= 1, got {self.min_len}")
        if self.lrv_method is LrvMethod.FIXED and self.fixed_sigma is None:
            raise ConfigurationError("fixed variance method needs fixed_sigma")
        if self.mc_reps < 100:
            raise ConfigurationError(f"mc_reps must be >= 100, got {self.mc_reps}")


@dataclass(frozen=True)
class Fit:
    """Detector output."""

    k_hat: int
    signal: StepSignal
    level_intervals: Tuple[ValueInterval, ...]
    q_used: float
    sigma_used: float
    min_len: int
    sse: float
    v_value: float
    alpha: Optional[float] = None
    lrv: Optional[LrvEstimate] = None

    @property
    def breaks(self) -> Tuple[int, ...]:
        return self.signal.breaks

    @property
    def levels(self) -> Tuple[float, ...]:
        return self.signal.levels

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k_hat": self.k_hat,
            "breaks": list(self.breaks),
            "levels": list(self.levels),
            "level_intervals": [list(iv.to_json()) for iv in self.level_intervals],
            "q": self.q_used,
            "alpha": self.alpha,
            "sigma": self.sigma_used,
            "min_len": self.min_len,
            "sse": self.sse,
            "v_value": self.v_value if math.isfinite(self.v_value) else None,
        }


def _as_series(y: Sequence[float]) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise InvalidInputError("expected a non-empty 1-d series")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("series contains non-finite values")
    return arr


def _tied(value: np.ndarray, best: np.ndarray) -> np.ndarray:
    return value <= best + TIE_TOL * (1.0 + np.abs(best))


def feasibility_sweep(y: Sequence[float], cfg: ScaleConfig, visit: SweepVisitor) -> None:
    """
    Sweep right endpoints j = 1..n, maintaining I(i, j) for all starts i <= j.

    After the update for j, ``visit(j, lo, hi)`` is called with arrays of length
    j: entry i - 1 holds the bounds of I(i, j), and ``lo > hi`` marks an empty
    interval. Pieces shorter than ``cfg.min_len`` are unconstrained. The arrays
    are the sweep's working buffers and are only valid during the call.
    """
    arr = _as_series(y)
    n = cfg.n
    if len(arr) != n:
        raise InvalidInputError(f"series has {len(arr)} samples, config expects {n}")

    min_len = cfg.min_len
    prefix = np.r_[0.0, np.cumsum(arr)]
    widths = half_widths(cfg)
    lengths = np.arange(n + 1, dtype=float)
    lo = np.full(n, -math.inf)
    hi = np.full(n, math.inf)

    for j in range(1, n + 1):
        last_start = j - min_len + 1
        if last_start >= 1:
            # Sub-intervals [l, j] for l = 1..last_start, lengths j..min_len
            m = lengths[min_len : j + 1][::-1]
            means = (prefix[j] - prefix[:last_start]) / m
            w = widths[min_len : j + 1][::-1]

            # D(l, j): intersection of C(l', j) over l' >= l
            d_lo = np.maximum.accumulate((means - w)[::-1])[::-1]
            d_hi = np.minimum.accumulate((means + w)[::-1])[::-1]
            np.maximum(lo[:last_start], d_lo, out=lo[:last_start])
            np.minimum(hi[:last_start], d_hi, out=hi[:last_start])
        visit(j, lo[:j], hi[:j])


def _min_segments(y: np.ndarray, cfg: ScaleConfig) -> int:
    """Smallest number of feasible pieces covering 1..n."""
    n = cfg.n
    minseg = np.full(n + 1, n + 1, dtype=np.int64)
    minseg[0] = 0

    def visit(j: int, lo: np.ndarray, hi: np.ndarray) -> None:
        feasible = lo <= hi
        # Single points are never constrained beyond a non-empty interval
        minseg[j] = minseg[:j][feasible].min() + 1

    feasibility_sweep(y, cfg, visit)
    return int(minseg[n])


def segment(y: Sequence[float], cfg: ScaleConfig) -> Fit:
    """
    Minimal-jump least-squares step function under the acceptance region.

    Among optimal partitions with equal residual sum the one with the
    lexicographically smallest break sequence is returned. The sweep runs on
    the reversed, centred series so that a backward reconstruction yields the
    earliest admissible breaks first.
    """
    arr = _as_series(y)
    n = cfg.n
    if len(arr) != n:
        raise InvalidInputError(f"series has {len(arr)} samples, config expects {n}")

    center = float(np.mean(arr))
    z = arr[::-1] - center

    pieces = _min_segments(z, cfg)
    if pieces > n:
        raise AssertionError("no feasible segmentation; single points must be feasible")
    k_hat = pieces - 1
    logger.debug(f"Minimal segmentation of n={n}: {pieces} pieces")

    prefix = np.r_[0.0, np.cumsum(z)]
    prefix_sq = np.r_[0.0, np.cumsum(z * z)]

    # cost[k, j]: best residual sum covering z[1..j] with k pieces
    cost = np.full((pieces + 1, n + 1), math.inf)
    cost[0, 0] = 0.0
    start = np.zeros((pieces + 1, n + 1), dtype=np.int64)
    level = np.zeros((pieces + 1, n + 1))
    bound_lo = np.zeros((pieces + 1, n + 1))
    bound_hi = np.zeros((pieces + 1, n + 1))

    def visit(j: int, lo: np.ndarray, hi: np.ndarray) -> None:
        starts0 = np.flatnonzero(lo <= hi)
        m = j - starts0
        s1 = prefix[j] - prefix[starts0]
        s2 = prefix_sq[j] - prefix_sq[starts0]
        means = s1 / m
        theta = np.clip(means, lo[starts0], hi[starts0])
        seg_cost = np.maximum(s2 - s1 * means, 0.0) + m * (means - theta) ** 2

        candidates = cost[:-1, starts0] + seg_cost[None, :]
        best = candidates.min(axis=1)
        tied = _tied(candidates, best[:, None])
        # Latest start among ties = earliest break in the original orientation
        pick = tied.shape[1] - 1 - np.argmax(tied[:, ::-1], axis=1)

        chosen = starts0[pick]
        cost[1:, j] = best
        start[1:, j] = chosen + 1
        level[1:, j] = theta[pick]
        bound_lo[1:, j] = lo[chosen]
        bound_hi[1:, j] = hi[chosen]

    feasibility_sweep(z, cfg, visit)
    if not math.isfinite(cost[pieces, n]):
        raise AssertionError("second pass found no partition with the minimal count")

    # Backtrack on the reversed series; the first piece found is the original first
    breaks: List[int] = []
    levels: List[float] = []
    intervals: List[ValueInterval] = []
    j = n
    for k in range(pieces, 0, -1):
        i = int(start[k, j])
        breaks.append(n - j + 1)
        levels.append(level[k, j] + center)
        intervals.append(ValueInterval(bound_lo[k, j] + center, bound_hi[k, j] + center))
        j = i - 1

    signal = StepSignal.from_arrays(breaks[1:], levels, n, merge=False)
    fitted = signal.sample(n)
    sse = float(np.sum((arr - fitted) ** 2))
    return Fit(
        k_hat=k_hat,
        signal=signal,
        level_intervals=tuple(intervals),
        q_used=cfg.q,
        sigma_used=cfg.sigma,
        min_len=cfg.min_len,
        sse=sse,
        v_value=v_stat(arr, signal, cfg),
    )


def resolve_sigma(y: np.ndarray, config: DetectorConfig) -> LrvEstimate:
    """Long-run variance per the detector's method; zero is rejected."""
    if config.lrv_method is LrvMethod.FIXED:
        lrv = fixed_lrv(config.fixed_sigma)
    else:
        lrv = estimate_lrv(y, config.lrv_method, config.block_length)
    if lrv.sigma_star == 0:
        raise DegenerateDataError(
            f"estimated long-run variance is zero ({lrv.method.value}); "
            "the series is constant at the estimator's resolution"
        )
    return lrv


def resolve_threshold(n: int, min_len: int, config: DetectorConfig) -> float:
    """Explicit q, or the Monte-Carlo (1 - alpha) quantile."""
    if config.q is not None:
        return config.q
    return mc_quantile(n, min_len, config.alpha, config.mc_reps, config.seed, config.cache)


def detect(y: Sequence[float], config: DetectorConfig) -> Fit:
    """
    Run the full estimator: resolve sigma and q, then segment.

    Args:
        y: Observed series
        config: Detector settings

    Returns:
        Fit with the minimal number of change points and best-fitting levels
    """
    arr = _as_series(y)
    n = len(arr)
    lrv = resolve_sigma(arr, config)
    min_len = config.min_len if config.min_len is not None else default_min_len(n)
    if min_len > n:
        raise ConfigurationError(f"min_len {min_len} exceeds series length {n}")
    if n < 2 * min_len:
        logger.warning(
            f"Series of length {n} is shorter than 2 * min_len = {2 * min_len}; "
            "pieces are barely constrained"
        )

    q = resolve_threshold(n, min_len, config)
    cfg = ScaleConfig(n=n, min_len=min_len, q=q, sigma=lrv.sigma_star)
    fit = segment(arr, cfg)
    logger.debug(
        f"Detected K={fit.k_hat} (n={n}, q={q:.4f}, sigma={lrv.sigma_star:.4f})"
    )
    return replace(fit, alpha=config.alpha, lrv=lrv)


def brute_force_detect(y: Sequence[float], cfg: ScaleConfig) -> Fit:
    """
    Reference estimator by enumeration of all 2^(n-1) break patterns.

    Uses the same tie-break as ``segment``: minimal break count, then minimal
    residual sum, then the lexicographically smallest break sequence.
    """
    arr = _as_series(y)
    n = cfg.n
    if n > BRUTE_FORCE_MAX_N:
        raise InvalidInputError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}")
    if len(arr) != n:
        raise InvalidInputError(f"series has {len(arr)} samples, config expects {n}")

    # Feasible interval and clamped cost of every piece [i, j], 1-based
    pieces: Dict[Tuple[int, int], Tuple[ValueInterval, float, float]] = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            interval = ValueInterval()
            for l in range(i, j + 1):
                for r in range(l + cfg.min_len - 1, j + 1):
                    mean = float(np.mean(arr[l - 1 : r]))
                    interval = interval.intersect(
                        constraint_interval(mean, r - l + 1, cfg)
                    )
            if interval.empty:
                continue
            theta = interval.clamp(float(np.mean(arr[i - 1 : j])))
            sse = float(np.sum((arr[i - 1 : j] - theta) ** 2))
            pieces[(i, j)] = (interval, theta, sse)

    best: Optional[Tuple[int, float, Tuple[int, ...]]] = None
    for k in range(n):
        for breaks in itertools.combinations(range(2, n + 1), k):
            bounds = (1, *breaks, n + 1)
            segs = [(bounds[s], bounds[s + 1] - 1) for s in range(k + 1)]
            if not all(seg in pieces for seg in segs):
                continue
            sse = sum(pieces[seg][2] for seg in segs)
            if best is None or (
                not _tied(np.float64(sse), np.float64(best[1])) and sse < best[1]
            ):
                best = (k, sse, breaks)
        if best is not None:
            break

    if best is None:
        raise AssertionError("no feasible segmentation; single points must be feasible")

    k, _, breaks = best
    bounds = (1, *breaks, n + 1)
    segs = [(bounds[s], bounds[s + 1] - 1) for s in range(k + 1)]
    signal = StepSignal.from_arrays(breaks, [pieces[s][1] for s in segs], n, merge=False)
    return Fit(
        k_hat=k,
        signal=signal,
        level_intervals=tuple(pieces[s][0] for s in segs),
        q_used=cfg.q,
        sigma_used=cfg.sigma,
        min_len=cfg.min_len,
        sse=float(np.sum((arr - signal.sample(n)) ** 2)),
        v_value=v_stat(arr, signal, cfg),
    )
