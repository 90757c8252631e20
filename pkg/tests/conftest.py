"""Shared fixtures for the DepSMUCE test suite."""

from pathlib import Path

import numpy as np
import pytest

from config import Config
from multiscale import QuantileCache, mc_quantile
from noise import Seed
from step_signal import StepSignal

N = 1000
BREAKS = (101, 301, 501, 551, 751)

# Seeded quantiles recorded by the first slow run and kept under version control
FROZEN_QUANTILES = Path(__file__).parent / "data" / "frozen_quantiles.json"
FROZEN_SEED = 20240101


@pytest.fixture
def ma1_signal() -> StepSignal:
    """Five-jump truth of the MA(1) scenarios."""
    return StepSignal(BREAKS, (0, 1, 0, 2, 0, -1), N)


@pytest.fixture
def rng() -> np.random.Generator:
    return Seed(12345).rng()


@pytest.fixture
def config(tmp_path: Path) -> Config:
    """Configuration that keeps every file inside the test's directory."""
    return Config(
        quantile_cache_path=tmp_path / "quantiles.json",
        results_db_path=tmp_path / "results.db",
        mc_reps=200,
        seed=7,
        burn_in=100,
    )


@pytest.fixture(scope="session")
def frozen_quantile() -> float:
    """q for n=1000, min_len=10, alpha=0.5 and 10000 seeded null replicates."""
    store = QuantileCache(FROZEN_QUANTILES)
    seed = Seed(FROZEN_SEED)
    key = QuantileCache.key(1000, 10, 0.5, 10000, seed)
    value = store.get(key)
    if value is None:
        value = mc_quantile(1000, 10, 0.5, 10000, seed)
        store.put(key, value)
    return value
