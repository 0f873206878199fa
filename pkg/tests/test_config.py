"""Tests for run configuration loading."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterator

import pytest

from archimedean import GeneratorFamily
from config import ENV_PREFIX, RunConfig, load_run_config
from errors import DomainError
from volatility import ArmaAparchSpec


@pytest.fixture(name="clean_env", autouse=True)
def fixture_clean_env() -> Iterator[None]:
    # load_dotenv writes straight into os.environ
    saved = {key: value for key, value in os.environ.items() if key.startswith(ENV_PREFIX)}
    for key in saved:
        del os.environ[key]
    yield
    for key in [key for key in os.environ if key.startswith(ENV_PREFIX)]:
        del os.environ[key]
    os.environ.update(saved)


@pytest.fixture(name="no_env_file")
def fixture_no_env_file(tmp_path: Path) -> Path:
    return tmp_path / "absent.env"


def test_defaults(no_env_file: Path):
    config = load_run_config(no_env_file)
    assert config == RunConfig()
    assert config.family == "gumbel"
    assert config.copula_mode == "hac"
    assert config.aparch_spec == ArmaAparchSpec(1, 2, 1, 1)
    assert config.generator_family is GeneratorFamily.GUMBEL
    assert config.backtest_days is None


def test_environment_overrides_defaults(no_env_file: Path, monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("HACRISK_FAMILY", " Clayton ")
    monkeypatch.setenv("HACRISK_SPEC", "0,0,1,1")
    monkeypatch.setenv("HACRISK_N_SCENARIOS", "2000")
    monkeypatch.setenv("HACRISK_TARGET_RETURN", "")
    config = load_run_config(no_env_file)
    assert config.family == "clayton"
    assert config.spec == (0, 0, 1, 1)
    assert config.n_scenarios == 2000
    assert config.target_return is None


def test_env_file_does_not_override_process_environment(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    env_file = tmp_path / ".env"
    env_file.write_text("HACRISK_ALPHA=0.99\nHACRISK_WINDOW=500\n", encoding="utf-8")
    monkeypatch.setenv("HACRISK_ALPHA", "0.9")
    config = load_run_config(env_file)
    assert config.alpha == 0.9
    assert config.window == 500


def test_explicit_overrides_win_and_none_is_ignored(no_env_file: Path, monkeypatch: pytest.MonkeyPatch):
    monkeypatch.setenv("HACRISK_SEED", "7")
    monkeypatch.setenv("HACRISK_COPULA_MODE", "ac")
    config = load_run_config(no_env_file, seed=42, copula_mode=None, family=GeneratorFamily.JOE)
    assert config.seed == 42
    assert config.copula_mode == "ac"
    assert config.family == "joe"


@pytest.mark.parametrize(
    "overrides",
    [
        {"n_scenarios": 10},
        {"window": 100},
        {"alpha": 1.0},
        {"family": "student"},
        {"copula_mode": "vine"},
        {"spec": "0,0,0,1"},
        {"spec": "1,2"},
        {"max_weight": 0.0},
        {"unknown": 1},
    ],
)
def test_invalid_settings_are_domain_errors(no_env_file: Path, overrides: dict):
    with pytest.raises(DomainError, match="invalid run configuration"):
        load_run_config(no_env_file, **overrides)


def test_config_is_frozen():
    with pytest.raises(ValueError):
        RunConfig().seed = 3  # type: ignore[misc]


def test_output_dir_comes_from_the_environment(no_env_file: Path, monkeypatch: pytest.MonkeyPatch, tmp_path: Path):
    monkeypatch.setenv("HACRISK_OUTPUT_DIR", str(tmp_path / "runs"))
    assert load_run_config(no_env_file).output_dir == tmp_path / "runs"
    assert load_run_config(no_env_file, output_dir=tmp_path / "flag").output_dir == tmp_path / "flag"
