"""
Long-run variance estimators that tolerate a piecewise-constant mean.

Both estimators difference the data (raw samples or block means) so that a step
signal contributes only through the few differences that straddle a jump.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigurationError, DegenerateDataError, InvalidInputError


class LrvMethod(Enum):
    """How the long-run variance is obtained."""

    BLOCK_DIFF = "block_diff"
    IID_DIFF = "iid_diff"
    FIXED = "fixed"


@dataclass(frozen=True)
class LrvEstimate:
    """Estimated long-run variance and the settings that produced it."""

    sigma_star_sq: float
    method: LrvMethod
    block_length: Optional[int] = None
    blocks_used: Optional[int] = None

    def __post_init__(self) -> None:
        if not (self.sigma_star_sq >= 0 and math.isfinite(self.sigma_star_sq)):
            raise InvalidInputError(
                f"long-run variance must be finite and >= 0, got {self.sigma_star_sq}"
            )

    @property
    def sigma_star(self) -> float:
        return math.sqrt(self.sigma_star_sq)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma_star_sq": self.sigma_star_sq,
            "sigma_star": self.sigma_star,
            "method": self.method.value,
            "block_length": self.block_length,
            "blocks_used": self.blocks_used,
        }


def _as_series(y: Sequence[float]) -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"expected a 1-d series, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("series contains non-finite values")
    return arr


def default_block_length(n: int) -> int:
    """Block length of order n^(1/3); 10 at n = 1000."""
    if n < 8:
        raise InvalidInputError(f"default block length needs n >= 8, got {n}")
    return max(2, int(round(n ** (1.0 / 3.0))))


def block_diff_lrv(y: Sequence[float], k: Optional[int] = None) -> LrvEstimate:
    """
    Difference-of-block-means estimator.

    The series is cut into m = floor(n / k) blocks of length k (a trailing
    partial block is dropped) and

        sigma^2 = k / (2 (m - 1)) * sum_i (A_i - A_{i-1})^2

    over the block means A_i.
    """
    arr = _as_series(y)
    n = len(arr)
    if k is None:
        k = default_block_length(n)
    if k < 1:
        raise ConfigurationError(f"block length must be >= 1, got {k}")

    m = n // k
    if m < 2:
        raise DegenerateDataError(
            f"block estimator needs at least 2 complete blocks: n={n}, k={k}"
        )

    means = arr[: m * k].reshape(m, k).mean(axis=1)
    estimate = k / (2.0 * (m - 1)) * float(np.sum(np.diff(means) ** 2))
    return LrvEstimate(estimate, LrvMethod.BLOCK_DIFF, block_length=k, blocks_used=m)


def iid_diff_lrv(y: Sequence[float]) -> LrvEstimate:
    """First-difference variance estimator, consistent for independent errors."""
    arr = _as_series(y)
    n = len(arr)
    if n < 2:
        raise DegenerateDataError(f"difference estimator needs n >= 2, got {n}")

    estimate = float(np.sum(np.diff(arr) ** 2)) / (2.0 * (n - 1))
    return LrvEstimate(estimate, LrvMethod.IID_DIFF)


def fixed_lrv(sigma: float) -> LrvEstimate:
    """Wrap a known long-run standard deviation."""
    if not (sigma >= 0 and math.isfinite(sigma)):
        raise ConfigurationError(f"fixed sigma must be finite and >= 0, got {sigma}")
    return LrvEstimate(sigma * sigma, LrvMethod.FIXED)


def parse_lrv_spec(text: str) -> Tuple[LrvMethod, Optional[float]]:
    """
    Parse "block", "iid-diff" or "fixed:<sigma>".

    Returns:
        (method, fixed sigma or None)
    """
    if text == "block":
        return LrvMethod.BLOCK_DIFF, None
    if text == "iid-diff":
        return LrvMethod.IID_DIFF, None
    if text.startswith("fixed:"):
        try:
            sigma = float(text[len("fixed:"):])
        except ValueError as e:
            raise ConfigurationError(f"bad fixed sigma in {text!r}") from e
        if not (sigma > 0 and math.isfinite(sigma)):
            raise ConfigurationError(f"fixed sigma must be > 0, got {sigma}")
        return LrvMethod.FIXED, sigma
    raise ConfigurationError(
        f"unknown variance method {text!r}; use block, iid-diff or fixed:<sigma>"
    )


def estimate_lrv(
    y: Sequence[float],
    method: LrvMethod = LrvMethod.BLOCK_DIFF,
    block_length: Optional[int] = None,
    fixed_sigma: Optional[float] = None,
) -> LrvEstimate:
    """Dispatch to the estimator selected by ``method``."""
    if method is LrvMethod.BLOCK_DIFF:
        return block_diff_lrv(y, block_length)
    if method is LrvMethod.IID_DIFF:
        return iid_diff_lrv(y)
    if fixed_sigma is None:
        raise ConfigurationError("fixed variance method needs a sigma value")
    return fixed_lrv(fixed_sigma)
