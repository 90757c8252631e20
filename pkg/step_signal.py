"""
Piecewise-constant signals on the sampling grid 1..n.

A signal with K change points stores the first sample index of every segment
after the first (``breaks``) and the K + 1 segment levels. Fractional change
point locations are derived as ``break / n``.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from errors import InvalidInputError


@dataclass(frozen=True)
class StepSignal:
    """A step function: integer breakpoints plus one level per segment."""

    breaks: Tuple[int, ...]
    levels: Tuple[float, ...]
    n: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "breaks", tuple(int(b) for b in self.breaks))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))

        if len(self.levels) != len(self.breaks) + 1:
            raise InvalidInputError(
                f"need {len(self.breaks) + 1} levels for {len(self.breaks)} breaks, "
                f"got {len(self.levels)}"
            )
        if not all(math.isfinite(v) for v in self.levels):
            raise InvalidInputError("levels must be finite")
        if any(b < 2 for b in self.breaks):
            raise InvalidInputError(f"breaks must be >= 2, got {self.breaks}")
        if any(b1 >= b2 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise InvalidInputError(f"breaks must be strictly increasing: {self.breaks}")
        if self.n is not None:
            self.check_length(self.n)

    @classmethod
    def from_arrays(
        cls,
        breaks: Sequence[int],
        levels: Sequence[float],
        n: Optional[int] = None,
        merge: bool = True,
    ) -> "StepSignal":
        """Build a signal, merging equal neighbouring levels unless told not to."""
        signal = cls(tuple(breaks), tuple(levels), n)
        return signal.normalize() if merge else signal

    @classmethod
    def constant(cls, level: float, n: Optional[int] = None) -> "StepSignal":
        """A signal without change points."""
        return cls((), (level,), n)

    @classmethod
    def from_fractions(
        cls, taus: Sequence[float], levels: Sequence[float], n: int
    ) -> "StepSignal":
        """Build a signal from change point locations in (0, 1], rounding n*tau half up."""
        breaks = [int(math.floor(n * tau + 0.5)) for tau in taus]
        return cls.from_arrays(breaks, levels, n)

    @property
    def k(self) -> int:
        """Number of change points."""
        return len(self.breaks)

    @property
    def is_canonical(self) -> bool:
        """True when no two neighbouring levels are equal."""
        return all(a != b for a, b in zip(self.levels, self.levels[1:]))

    def taus(self, n: Optional[int] = None) -> Tuple[float, ...]:
        """Change point locations as fractions of the sample count."""
        n = self._resolve_n(n)
        return tuple(b / n for b in self.breaks)

    def normalize(self) -> "StepSignal":
        """Merge neighbouring segments that share a level."""
        if self.is_canonical:
            return self

        breaks = []
        levels = [self.levels[0]]
        for b, level in zip(self.breaks, self.levels[1:]):
            if level != levels[-1]:
                breaks.append(b)
                levels.append(level)
        return StepSignal(tuple(breaks), tuple(levels), self.n)

    def check_length(self, n: int) -> None:
        """Raise unless the signal fits on the grid 1..n."""
        if n < 1:
            raise InvalidInputError(f"sample count must be >= 1, got {n}")
        if self.breaks and self.breaks[-1] > n:
            raise InvalidInputError(
                f"break {self.breaks[-1]} exceeds sample count {n}"
            )

    def value_at(self, i: int, n: Optional[int] = None) -> float:
        """Level of the segment containing sample index i (1-based)."""
        n = self._resolve_n(n)
        self.check_length(n)
        if not 1 <= i <= n:
            raise InvalidInputError(f"sample index {i} outside 1..{n}")
        k = int(np.searchsorted(self.breaks, i, side="right"))
        return self.levels[k]

    def sample(self, n: Optional[int] = None) -> np.ndarray:
        """Evaluate the signal at every sample index 1..n."""
        n = self._resolve_n(n)
        self.check_length(n)
        bounds = np.array((1, *self.breaks, n + 1))
        return np.repeat(np.asarray(self.levels), np.diff(bounds))

    def segments(self, n: Optional[int] = None) -> Tuple[Tuple[int, int, float], ...]:
        """(first, last, level) for every segment, 1-based and inclusive."""
        n = self._resolve_n(n)
        self.check_length(n)
        starts = (1, *self.breaks)
        stops = (*(b - 1 for b in self.breaks), n)
        return tuple(zip(starts, stops, self.levels))

    def affine(self, scale: float, shift: float = 0.0) -> "StepSignal":
        """Map every level v to scale * v + shift."""
        return StepSignal.from_arrays(
            self.breaks, [scale * v + shift for v in self.levels], self.n
        )

    def to_dict(self, n: Optional[int] = None) -> Dict[str, Any]:
        """JSON form with breaks, levels and the sample count."""
        return {
            "n": n if n is not None else self.n,
            "breaks": list(self.breaks),
            "levels": list(self.levels),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StepSignal":
        """Parse the JSON form; equal neighbouring levels are merged."""
        try:
            return cls.from_arrays(data["breaks"], data["levels"], data.get("n"))
        except (KeyError, TypeError) as e:
            raise InvalidInputError(f"invalid signal JSON: {e}") from e

    def _resolve_n(self, n: Optional[int]) -> int:
        if n is not None:
            return n
        if self.n is None:
            raise InvalidInputError("sample count not given and signal has no n")
        return self.n


def evaluate(signal: StepSignal, i: int, n: int) -> float:
    """Value of the signal at sample index i of n."""
    return signal.value_at(i, n)


def signal_distance(a: StepSignal, b: StepSignal, n: int) -> Tuple[float, float]:
    """
    Mean squared and mean absolute difference of two signals over 1..n.

    Returns:
        (mse, mae)
    """
    diff = a.sample(n) - b.sample(n)
    return float(np.mean(diff**2)), float(np.mean(np.abs(diff)))


def cp_distance(truth: StepSignal, est: StepSignal, n: int) -> float:
    """
    Worst localization error of the true change points.

    For every true break the nearest estimated break is found; the largest of
    these distances is returned on the [0, 1] scale. An estimate without breaks
    yields ``math.inf``.
    """
    if truth.k == 0:
        raise InvalidInputError("true signal must have at least one change point")
    truth.check_length(n)
    est.check_length(n)
    if est.k == 0:
        return math.inf

    true_breaks = np.asarray(truth.breaks, dtype=float)
    est_breaks = np.asarray(est.breaks, dtype=float)
    nearest = np.min(np.abs(true_breaks[:, None] - est_breaks[None, :]), axis=1)
    return float(np.max(nearest)) / n
