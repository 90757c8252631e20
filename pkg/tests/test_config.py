import os
from pathlib import Path

import pytest

from config import Config
from errors import ConfigurationError

ENV_VARS = (
    "DEPSMUCE_CACHE",
    "DEPSMUCE_RESULTS_DB",
    "DEPSMUCE_MC_REPS",
    "DEPSMUCE_SEED",
    "DEPSMUCE_BURN_IN",
    "DEPSMUCE_WORKERS",
    "DEPSMUCE_HIST_BIN_WIDTH",
    "DEPSMUCE_LOG_LEVEL",
)


def _isolate_env(mp: pytest.MonkeyPatch) -> None:
    # Set before deleting so undo also removes values load_dotenv writes
    for name in ENV_VARS:
        mp.setenv(name, "")
        mp.delenv(name)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    _isolate_env(monkeypatch)


def test_defaults(tmp_path):
    config = Config.load(tmp_path / "missing.env")
    assert config.mc_reps == 10000
    assert config.seed == 20240101
    assert config.burn_in == 1000
    assert config.workers == 1
    assert config.hist_bin_width == 10
    assert not config.results_db_explicit


def test_environment_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("DEPSMUCE_CACHE", str(tmp_path / "q.json"))
    monkeypatch.setenv("DEPSMUCE_MC_REPS", "500")
    monkeypatch.setenv("DEPSMUCE_RESULTS_DB", str(tmp_path / "r.db"))
    monkeypatch.setenv("DEPSMUCE_LOG_LEVEL", "debug")
    config = Config.load(tmp_path / "missing.env")
    assert config.quantile_cache_path == tmp_path / "q.json"
    assert config.mc_reps == 500
    assert config.results_db_explicit
    assert config.log_level == "DEBUG"


def test_env_file_does_not_override_process_environment(tmp_path, monkeypatch):
    env_file = tmp_path / ".env"
    env_file.write_text("DEPSMUCE_SEED=5\nDEPSMUCE_WORKERS=3\n")
    monkeypatch.setenv("DEPSMUCE_SEED", "9")
    config = Config.load(env_file)
    assert config.seed == 9
    assert config.workers == 3


def test_env_file_values_are_removed_on_teardown(tmp_path):
    env_file = tmp_path / ".env"
    env_file.write_text("DEPSMUCE_WORKERS=3\n")
    with pytest.MonkeyPatch.context() as mp:
        _isolate_env(mp)
        Config.load(env_file)
        assert os.environ["DEPSMUCE_WORKERS"] == "3"
    assert "DEPSMUCE_WORKERS" not in os.environ


@pytest.mark.parametrize(
    "name, value",
    [("DEPSMUCE_MC_REPS", "ten"), ("DEPSMUCE_MC_REPS", "50"), ("DEPSMUCE_WORKERS", "0")],
)
def test_invalid_values(tmp_path, monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ConfigurationError):
        Config.load(tmp_path / "missing.env")


def test_direct_construction_is_validated():
    with pytest.raises(ConfigurationError):
        Config(quantile_cache_path=Path("q.json"), burn_in=-1)
