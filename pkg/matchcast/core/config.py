from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from matchcast.core.errors import ConfigError
from matchcast.schemas.dirichlet import GridSpec
from matchcast.schemas.poisson import TrainingWindow

logger = logging.getLogger(__name__)

CONFIG_ENV = "MATCHCAST_CONFIG"

MODEL_NAMES = ("mn-dir1", "mn-dir2", "bt", "poisson-lee", "poisson-biv", "trivial")


class BTSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tol: float = Field(default=1e-8, gt=0.0)
    max_iter: int = Field(default=500, ge=1)
    # границы для log-параметров
    bound: float = Field(default=30.0, gt=0.0)


class PoissonSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tail_tol: float = Field(default=1e-10, gt=0.0, le=1e-3)
    correlated: bool = True
    window: str = "all"
    tol: float = Field(default=1e-8, gt=0.0)
    max_iter: int = Field(default=500, ge=1)
    bound: float = Field(default=30.0, gt=0.0)

    @field_validator("window")
    @classmethod
    def check_window(cls, v: str) -> str:
        return str(TrainingWindow.parse(v))

    @property
    def training_window(self) -> TrainingWindow:
        return TrainingWindow.parse(self.window)


class DirichletSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # априорное D(alpha, alpha, alpha) для Mn-Dir1
    alpha: float = Field(default=1.0, gt=0.0)
    w_points: int = Field(default=20, ge=1)
    alpha_points: int = Field(default=20, ge=1)
    alpha_min: float = Field(default=0.001, gt=0.0)
    alpha_max: float = Field(default=20.0, gt=0.0)

    def grid(self) -> GridSpec:
        return GridSpec.equally_spaced(
            n_w=self.w_points,
            n_alpha=self.alpha_points,
            alpha_min=self.alpha_min,
            alpha_max=self.alpha_max,
        )


class CalibrationSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bins: int = Field(default=10, ge=1)
    grid_points: int = Field(default=19, ge=2)
    level: float = Field(default=0.95, gt=0.0, lt=1.0)
    min_pairs: int = Field(default=30, ge=1)


class EvaluationSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # требовать 380 матчей в сезоне (репликация бразильского чемпионата)
    strict: bool = False


class Settings(BaseSettings):
    matches: Path | None = None
    models: str = "mn-dir1,mn-dir2,bt,poisson-lee,poisson-biv,trivial"
    out: Path = Path("out")
    seed: int = 2014
    log_level: str = "WARNING"

    bt: BTSettings = Field(default_factory=BTSettings)
    poisson: PoissonSettings = Field(default_factory=PoissonSettings)
    dirichlet: DirichletSettings = Field(default_factory=DirichletSettings)
    calibration: CalibrationSettings = Field(default_factory=CalibrationSettings)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)

    model_config = SettingsConfigDict(
        env_prefix="MATCHCAST_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="forbid",
    )

    @field_validator("models")
    @classmethod
    def check_models(cls, v: str) -> str:
        names = [m.strip() for m in v.split(",") if m.strip()]
        if not names:
            raise ValueError("at least one model is required")
        for name in names:
            if name not in MODEL_NAMES and not (name.startswith("external:") and len(name) > 9):
                raise ValueError(f"unknown model {name!r}")
        return ",".join(names)

    @property
    def model_list(self) -> list[str]:
        return self.models.split(",")

    def describe(self) -> str:
        """Канонический key=value вид настроек (для run.cfg рядом с отчётом)."""
        lines: list[str] = []
        for key, value in sorted(_flatten(self.model_dump(mode="json")).items()):
            if value is None:
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"


def _flatten(data: dict[str, Any], prefix: str = "") -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, prefix=f"{name}."))
        else:
            out[name] = value
    return out


def _merge(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: str | os.PathLike[str]) -> dict[str, Any]:
    """Читает key=value файл; ключи с точкой (`bt.tol`) попадают во вложенные секции."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    nested: dict[str, Any] = {}
    for key, value in dotenv_values(p).items():
        if value is None:
            raise ConfigError(f"{p}: key {key!r} has no value")
        parts = key.strip().lower().split(".")
        if len(parts) == 1:
            nested[parts[0]] = value
        elif len(parts) == 2:
            nested.setdefault(parts[0], {})[parts[1]] = value
        else:
            raise ConfigError(f"{p}: unsupported key {key!r}")
    return nested


def load_settings(
    config_path: str | os.PathLike[str] | None = None,
    overrides: dict[str, Any] | None = None,
) -> Settings:
    """
    Порядок приоритета: флаги CLI > файл конфигурации (--config или MATCHCAST_CONFIG)
    > переменные окружения MATCHCAST_* > значения по умолчанию.
    """
    path = config_path or os.environ.get(CONFIG_ENV)
    values: dict[str, Any] = read_config_file(path) if path else {}
    if overrides:
        values = _merge(values, {k: v for k, v in overrides.items() if v is not None})
    try:
        settings = Settings(**values)
    except ValidationError as e:
        raise ConfigError(str(e)) from e
    logger.info("settings loaded from %s", path or "environment/defaults")
    return settings
