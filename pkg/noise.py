"""
Seeded simulation of dependent error processes.

Errors follow a causal ARMA recursion driven by Gaussian innovations

    e_i = sum_l ar[l] e_{i-l} + eta_i + sum_j ma[j] eta_{i-j},

and the long-run variance of such a process is available in closed form via its
impulse response.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter

from errors import ConfigurationError, InvalidInputError, NonStationaryError

logger = logging.getLogger(__name__)

DEFAULT_BURN_IN = 1000
TAIL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Seed:
    """Counter-style seed: replicate ``stream`` of experiment ``base``."""

    base: int
    stream: int = 0

    def __post_init__(self) -> None:
        for name in ("base", "stream"):
            value = getattr(self, name)
            if not 0 <= value < 2**64:
                raise ConfigurationError(f"seed {name} must fit in 64 unsigned bits")

    def rng(self, *substreams: int) -> np.random.Generator:
        """A fresh generator for this (base, stream) pair, optionally split further."""
        sequence = np.random.SeedSequence(
            entropy=self.base, spawn_key=(self.stream, *substreams)
        )
        return np.random.Generator(np.random.PCG64(sequence))

    @property
    def label(self) -> str:
        """Short form for logs and cache keys."""
        return str(self.base) if self.stream == 0 else f"{self.base}.{self.stream}"

    def with_stream(self, stream: int) -> "Seed":
        """Same experiment, another replicate."""
        return Seed(self.base, stream)


@dataclass(frozen=True)
class NoiseModel:
    """ARMA(p, q) error process with Gaussian innovations."""

    sigma_eta: float = 1.0
    ar: Tuple[float, ...] = field(default_factory=tuple)
    ma: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "ar", tuple(float(c) for c in self.ar))
        object.__setattr__(self, "ma", tuple(float(c) for c in self.ma))
        if not (self.sigma_eta > 0 and math.isfinite(self.sigma_eta)):
            raise InvalidInputError(f"sigma_eta must be > 0, got {self.sigma_eta}")
        if self.spectral_radius() >= 1.0:
            raise NonStationaryError(
                f"AR coefficients {self.ar} are not causal "
                f"(companion spectral radius {self.spectral_radius():.4f})"
            )

    @classmethod
    def white(cls, sigma_eta: float = 1.0) -> "NoiseModel":
        """IID Gaussian noise with standard deviation sigma_eta."""
        return cls(sigma_eta)

    @property
    def is_white(self) -> bool:
        """True when no AR or MA coefficient is non-zero."""
        return not any(self.ar) and not any(self.ma)

    def spectral_radius(self) -> float:
        """Largest modulus among the eigenvalues of the AR companion matrix."""
        p = len(self.ar)
        if p == 0:
            return 0.0
        companion = np.zeros((p, p))
        companion[0, :] = self.ar
        companion[1:, :-1] = np.eye(p - 1)
        return float(np.max(np.abs(np.linalg.eigvals(companion))))

    def filter_coefficients(self) -> Tuple[np.ndarray, np.ndarray]:
        """(numerator, denominator) for ``scipy.signal.lfilter``."""
        b = np.r_[1.0, self.ma]
        a = np.r_[1.0, -np.asarray(self.ar, dtype=float)]
        return b, a

    def to_dict(self) -> Dict[str, Any]:
        """JSON form used in scenario files."""
        return {"sigma_eta": self.sigma_eta, "ar": list(self.ar), "ma": list(self.ma)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NoiseModel":
        """Parse the JSON form, defaulting to unit white noise."""
        try:
            sigma_eta = float(data.get("sigma_eta", 1.0))
            ar = tuple(float(c) for c in data.get("ar", ()))
            ma = tuple(float(c) for c in data.get("ma", ()))
        except (AttributeError, TypeError, ValueError) as e:
            raise InvalidInputError(f"invalid noise JSON: {e}") from e
        return cls(sigma_eta, ar, ma)


def generate(
    model: NoiseModel, n: int, seed: Seed, burn_in: int = DEFAULT_BURN_IN
) -> np.ndarray:
    """
    Simulate n consecutive errors of the process.

    The recursion starts from a zero state; the first ``burn_in + p + q``
    outputs are dropped.

    Args:
        model: Error process
        n: Number of samples to return
        seed: Seed of the innovation stream
        burn_in: Number of warm-up samples to discard

    Returns:
        Array of length n
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if burn_in < 0:
        raise InvalidInputError(f"burn_in must be >= 0, got {burn_in}")

    skip = burn_in + len(model.ar) + len(model.ma)
    innovations = model.sigma_eta * seed.rng().standard_normal(n + skip)
    if model.is_white:
        return innovations[skip:]

    b, a = model.filter_coefficients()
    return lfilter(b, a, innovations)[skip:]


def impulse_response(model: NoiseModel, length: int) -> np.ndarray:
    """First ``length`` coefficients psi_j of the linear-process representation."""
    impulse = np.zeros(length)
    impulse[0] = 1.0
    b, a = model.filter_coefficients()
    return lfilter(b, a, impulse)


def _response_horizon(model: NoiseModel) -> int:
    """Length after which the geometric tail of psi is below the tolerance."""
    rho = model.spectral_radius()
    base = len(model.ma) + 1
    if rho == 0.0:
        return base
    decay = math.log(TAIL_TOLERANCE) / math.log(rho)
    # Polynomial factors from repeated roots grow at most like j**p
    return base + 2 * int(math.ceil(decay)) + 10 * len(model.ar)


def oracle_lrv(model: NoiseModel) -> float:
    """Long-run variance sigma_eta^2 * (sum_j psi_j)^2 of the process."""
    horizon = _response_horizon(model)
    psi = impulse_response(model, horizon)
    logger.debug(f"Long-run variance of {model} from {horizon} psi weights")
    return model.sigma_eta**2 * float(np.sum(psi)) ** 2


def autocovariance(model: NoiseModel, max_lag: int, length: int = 10_000) -> np.ndarray:
    """gamma(0..max_lag) from a truncated impulse response."""
    psi = impulse_response(model, length + max_lag)
    gamma = np.array(
        [np.dot(psi[: length], psi[h : h + length]) for h in range(max_lag + 1)]
    )
    return model.sigma_eta**2 * gamma


def sample_autocovariance(x: Sequence[float], max_lag: int) -> np.ndarray:
    """Biased sample autocovariances of x at lags 0..max_lag."""
    x = np.asarray(x, dtype=float)
    x = x - x.mean()
    n = len(x)
    return np.array([np.dot(x[: n - h], x[h:]) / n for h in range(max_lag + 1)])
