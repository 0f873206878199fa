"""Run configuration: defaults, ``.env`` / environment overrides, validation."""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Literal

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from archimedean import GeneratorFamily
from errors import DomainError
from volatility import ArmaAparchSpec

logger = logging.getLogger(__name__)

ENV_PREFIX = "HACRISK_"
DEFAULT_ENV_FILE = Path(__file__).resolve().parent.parent / ".env"


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Literal["gumbel", "clayton", "frank", "joe"] = "gumbel"
    copula_mode: Literal["hac", "ac"] = "hac"
    n_scenarios: int = Field(default=10_000, ge=1000)
    alpha: float = Field(default=0.95, gt=0.0, lt=1.0)
    tail_fraction: float = Field(default=0.10, gt=0.0, lt=0.5)
    spec: tuple[int, int, int, int] = (1, 2, 1, 1)
    window: int = Field(default=1000, ge=300)
    refit_cadence: int = Field(default=10, ge=1)
    backtest_days: int | None = Field(default=None, ge=1)
    n_starts: int = Field(default=5, ge=1)
    max_weight: float = Field(default=1.0, gt=0.0, le=1.0)
    target_return: float | None = None
    seed: int = Field(default=0, ge=0)
    max_workers: int = Field(default=1, ge=1)
    output_dir: Path | None = None

    @field_validator("family", mode="before")
    @classmethod
    def _family(cls, value: Any) -> Any:
        if isinstance(value, GeneratorFamily):
            return value.value
        return value.strip().lower() if isinstance(value, str) else value

    @field_validator("copula_mode", mode="before")
    @classmethod
    def _mode(cls, value: Any) -> Any:
        return value.strip().lower() if isinstance(value, str) else value

    @field_validator("spec", mode="before")
    @classmethod
    def _spec(cls, value: Any) -> Any:
        if isinstance(value, ArmaAparchSpec):
            return (value.p, value.q, value.m, value.n)
        if isinstance(value, str):
            return tuple(int(part) for part in value.split(","))
        return value

    @model_validator(mode="after")
    def _orders(self) -> "RunConfig":
        ArmaAparchSpec(*self.spec)
        return self

    @property
    def aparch_spec(self) -> ArmaAparchSpec:
        return ArmaAparchSpec(*self.spec)

    @property
    def generator_family(self) -> GeneratorFamily:
        return GeneratorFamily.parse(self.family)


def _environment_values() -> dict[str, str]:
    values = {}
    for name in RunConfig.model_fields:
        raw = os.environ.get(f"{ENV_PREFIX}{name.upper()}")
        if raw is not None and raw.strip() != "":
            values[name] = raw.strip()
    return values


def load_run_config(env_file: Path | None = None, **overrides: Any) -> RunConfig:
    """Build a ``RunConfig`` from defaults, ``HACRISK_*`` variables and overrides.

    ``.env`` never overrides variables already set in the process environment;
    explicit overrides whose value is ``None`` are ignored.
    """

    path = env_file or DEFAULT_ENV_FILE
    if path.exists():
        load_dotenv(dotenv_path=path, override=False)
    values: dict[str, Any] = _environment_values()
    if values:
        logger.debug("configuration from environment: %s", sorted(values))
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise DomainError(f"invalid run configuration: {exc}") from exc
