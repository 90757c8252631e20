"""
Configuration module for the DepSMUCE toolkit.
Loads settings from .env file with environment variable override support.
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, TypeVar

from dotenv import load_dotenv

from errors import ConfigurationError

T = TypeVar("T")


def _env(name: str, default: str, cast: Callable[[str], T]) -> T:
    """Read and convert one environment variable."""
    raw = os.getenv(name, default)
    try:
        return cast(raw)
    except ValueError as e:
        raise ConfigurationError(f"{name}={raw!r} is not valid: {e}") from e


@dataclass
class Config:
    """Toolkit configuration loaded from environment variables."""

    # Storage
    quantile_cache_path: Path = Path("./quantile_cache.json")
    results_db_path: Path = Path("./results.db")
    results_db_explicit: bool = False

    # Monte-Carlo calibration
    mc_reps: int = 10000
    seed: int = 20240101

    # Simulation
    burn_in: int = 1000
    workers: int = 1
    hist_bin_width: int = 10

    log_level: str = "INFO"

    def __post_init__(self) -> None:
        if self.mc_reps < 100:
            raise ConfigurationError(f"mc_reps must be >= 100, got {self.mc_reps}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be non-negative, got {self.seed}")
        if self.burn_in < 0:
            raise ConfigurationError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.hist_bin_width < 1:
            raise ConfigurationError(
                f"hist_bin_width must be >= 1, got {self.hist_bin_width}"
            )

    @classmethod
    def load(cls, env_path: Optional[Path] = None) -> "Config":
        """Load configuration from .env file."""
        if env_path is None:
            env_path = Path(__file__).parent / ".env"

        # Process environment wins over the .env file
        if env_path.exists():
            load_dotenv(env_path, override=False)

        return cls(
            quantile_cache_path=Path(
                os.getenv("DEPSMUCE_CACHE", "./quantile_cache.json")
            ),
            results_db_path=Path(os.getenv("DEPSMUCE_RESULTS_DB", "./results.db")),
            results_db_explicit="DEPSMUCE_RESULTS_DB" in os.environ,
            mc_reps=_env("DEPSMUCE_MC_REPS", "10000", int),
            seed=_env("DEPSMUCE_SEED", "20240101", int),
            burn_in=_env("DEPSMUCE_BURN_IN", "1000", int),
            workers=_env("DEPSMUCE_WORKERS", "1", int),
            hist_bin_width=_env("DEPSMUCE_HIST_BIN_WIDTH", "10", int),
            log_level=os.getenv("DEPSMUCE_LOG_LEVEL", "INFO").upper(),
        )


def get_config() -> Config:
    """Get the toolkit configuration."""
    return Config.load()
