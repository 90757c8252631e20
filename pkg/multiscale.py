"""
Multiscale statistic, the interval constraints it induces, and calibration.

For a candidate step function the statistic scans every sub-interval of every
constant piece that is at least ``min_len`` samples long, standardizes the
local residual sum and subtracts a scale penalty sqrt(2 log(e n / m)). Bounding
the statistic by q is equivalent to requiring each piece's level to lie in the
intersection of one value interval per tested sub-interval.
"""

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigurationError, DegenerateDataError, InvalidInputError
from noise import Seed
from step_signal import StepSignal

logger = logging.getLogger(__name__)

MIN_Q = -math.sqrt(2.0)
NULL_CHUNK = 256


def default_min_len(n: int) -> int:
    """Smallest tested interval length, of order n^(1/3)."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    return min(n, max(2, int(round(n ** (1.0 / 3.0)))))


@dataclass(frozen=True)
class ScaleConfig:
    """Scale family and threshold of one multiscale test."""

    n: int
    min_len: int
    q: float
    sigma: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInputError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.min_len <= self.n:
            raise ConfigurationError(
                f"min_len must lie in 1..{self.n}, got {self.min_len}"
            )
        if not (self.q > MIN_Q and math.isfinite(self.q)):
            raise ConfigurationError(
                f"threshold q must be finite and > -sqrt(2), got {self.q}"
            )
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ConfigurationError(f"sigma must be finite and > 0, got {self.sigma}")
        if self.sigma == 0:
            raise DegenerateDataError("sigma is zero; the statistic is undefined")


@dataclass(frozen=True)
class ValueInterval:
    """Closed interval of admissible levels; lo > hi encodes the empty set."""

    lo: float = -math.inf
    hi: float = math.inf

    @property
    def empty(self) -> bool:
        """True when no value satisfies both bounds."""
        return self.lo > self.hi

    def intersect(self, other: "ValueInterval") -> "ValueInterval":
        """Values admissible under both intervals."""
        return ValueInterval(max(self.lo, other.lo), min(self.hi, other.hi))

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= value <= self.hi + tol

    def clamp(self, value: float) -> float:
        """Nearest admissible level."""
        if self.empty:
            raise InvalidInputError("cannot clamp onto an empty interval")
        return min(max(value, self.lo), self.hi)

    def to_json(self) -> Tuple[Optional[float], Optional[float]]:
        """Bounds as a pair, with infinite ends as None."""
        lo = None if math.isinf(self.lo) else self.lo
        hi = None if math.isinf(self.hi) else self.hi
        return lo, hi


def penalty(m: int, n: int) -> float:
    """Scale penalty sqrt(2 log(e n / m)) for an interval of length m."""
    if not 1 <= m <= n:
        raise InvalidInputError(f"interval length {m} outside 1..{n}")
    return math.sqrt(2.0 * (1.0 + math.log(n / m)))


def penalties(n: int) -> np.ndarray:
    """Penalty for every length; entry m holds penalty(m, n), entry 0 is unused."""
    lengths = np.arange(1, n + 1, dtype=float)
    return np.r_[np.nan, np.sqrt(2.0 * (1.0 + np.log(n / lengths)))]


def constraint_interval(mean: float, m: int, cfg: ScaleConfig) -> ValueInterval:
    """Levels theta with sqrt(m)|mean - theta| / sigma - penalty(m) <= q."""
    half_width = cfg.sigma * (cfg.q + penalty(m, cfg.n)) / math.sqrt(m)
    return ValueInterval(mean - half_width, mean + half_width)


def half_widths(cfg: ScaleConfig) -> np.ndarray:
    """Constraint half-width for every length; entry m belongs to length m."""
    lengths = np.r_[np.nan, np.arange(1, cfg.n + 1, dtype=float)]
    return cfg.sigma * (cfg.q + penalties(cfg.n)) / np.sqrt(lengths)


def _scan_max(residuals: np.ndarray, min_len: int, n: int) -> np.ndarray:
    """
    Row-wise maximum of |sum over [i, j]| / sqrt(m) - penalty(m, n).

    Args:
        residuals: 2-d array, one residual series per row (already divided by sigma)
        min_len: Shortest interval length scanned
        n: Sample count that sets the penalty

    Returns:
        One value per row; -inf when a row is shorter than ``min_len``
    """
    rows, length = residuals.shape
    best = np.full(rows, -math.inf)
    if length < min_len:
        return best

    pens = penalties(n)
    prefix = np.zeros((rows, length + 1))
    np.cumsum(residuals, axis=1, out=prefix[:, 1:])
    for m in range(min_len, length + 1):
        sums = prefix[:, m:] - prefix[:, :-m]
        current = np.abs(sums).max(axis=1) / math.sqrt(m) - pens[m]
        np.maximum(best, current, out=best)
    return best


def v_stat(y: Sequence[float], candidate: StepSignal, cfg: ScaleConfig) -> float:
    """
    Multiscale statistic of the data against a candidate step function.

    Returns ``-inf`` when no constant piece holds an interval of length
    ``cfg.min_len``.
    """
    arr = np.asarray(y, dtype=float)
    if len(arr) != cfg.n:
        raise InvalidInputError(f"series has {len(arr)} samples, config expects {cfg.n}")

    best = -math.inf
    for first, last, level in candidate.segments(cfg.n):
        if last - first + 1 < cfg.min_len:
            continue
        residuals = (arr[first - 1 : last] - level) / cfg.sigma
        best = max(best, float(_scan_max(residuals[None, :], cfg.min_len, cfg.n)[0]))
    return best


@lru_cache(maxsize=8)
def _null_sample(n: int, min_len: int, reps: int, base: int, stream: int) -> np.ndarray:
    seed = Seed(base, stream)
    stats = np.empty(reps)
    for start in range(0, reps, NULL_CHUNK):
        stop = min(start + NULL_CHUNK, reps)
        # One generator per replicate keeps the sample independent of chunking
        block = np.stack([seed.rng(r).standard_normal(n) for r in range(start, stop)])
        stats[start:stop] = _scan_max(block, min_len, n)
    stats.sort()
    stats.flags.writeable = False
    return stats


def null_statistics(n: int, min_len: int, reps: int, seed: Seed) -> np.ndarray:
    """
    Sorted Monte-Carlo sample of the statistic under a zero signal.

    Replicate r evaluates the statistic of iid N(0, 1) data (from stream
    ``seed.rng(r)``) against the zero function with sigma fixed at 1.
    """
    if reps < 100:
        raise ConfigurationError(f"calibration needs reps >= 100, got {reps}")
    if not 1 <= min_len <= n:
        raise ConfigurationError(f"min_len must lie in 1..{n}, got {min_len}")

    logger.info(f"Simulating null statistic: n={n}, min_len={min_len}, reps={reps}")
    return _null_sample(n, min_len, reps, seed.base, seed.stream)


def order_statistic_index(alpha: float, reps: int) -> int:
    """0-based index of the (1 - alpha) empirical quantile, ceil((1 - alpha) reps)."""
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    rank = math.ceil((1.0 - alpha) * reps - 1e-9)
    return min(max(rank, 1), reps) - 1


class QuantileCache:
    """JSON file of calibrated thresholds keyed by "n:min_len:alpha:reps:seed"."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._entries: Optional[Dict[str, float]] = None

    @staticmethod
    def key(n: int, min_len: int, alpha: float, reps: int, seed: Seed) -> str:
        return f"{n}:{min_len}:{alpha!r}:{reps}:{seed.label}"

    def _load(self) -> Dict[str, float]:
        if self._entries is None:
            self._entries = {}
            if self.path.exists():
                try:
                    raw = json.loads(self.path.read_text(encoding="utf-8"))
                    self._entries = {str(k): float(v) for k, v in raw.items()}
                except (OSError, ValueError, AttributeError) as e:
                    logger.warning(f"Ignoring unreadable quantile cache {self.path}: {e}")
        return self._entries

    def get(self, key: str) -> Optional[float]:
        return self._load().get(key)

    def put(self, key: str, value: float) -> None:
        entries = self._load()
        entries[key] = float(value)
        self.path.parent.mkdir(parents=True, exist_ok=True)

        # Write to a sibling file first so readers never see a partial map
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump(entries, f, indent=2, sort_keys=True)
            os.replace(tmp, self.path)
        except OSError:
            Path(tmp).unlink(missing_ok=True)
            raise

    def __len__(self) -> int:
        return len(self._load())


def mc_quantile(
    n: int,
    min_len: int,
    alpha: float,
    reps: int,
    seed: Seed,
    cache: Optional[QuantileCache] = None,
) -> float:
    """
    Threshold q as the empirical (1 - alpha) quantile of the null statistic.

    Args:
        n: Sample count
        min_len: Smallest tested interval length
        alpha: Level in (0, 1)
        reps: Monte-Carlo replicates (>= 100)
        seed: Seed of the replicate streams
        cache: Optional persistent cache

    Returns:
        The calibrated threshold
    """
    index = order_statistic_index(alpha, reps)
    key = QuantileCache.key(n, min_len, alpha, reps, seed)
    if cache is not None:
        cached = cache.get(key)
        if cached is not None:
            logger.info(f"Quantile cache hit for {key}: {cached:.6f}")
            return cached

    q = float(null_statistics(n, min_len, reps, seed)[index])
    logger.info(f"Calibrated q={q:.6f} for {key}")

    if cache is not None:
        cache.put(key, q)
    return q
