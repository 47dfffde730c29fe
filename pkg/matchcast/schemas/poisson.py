from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from matchcast.schemas.davidson import FitReport
from matchcast.schemas.match import TeamId

ZERO_SUM_TOL = 1e-9


class BivPoissonParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambda1: float = Field(gt=0.0)
    lambda2: float = Field(gt=0.0)
    lambda3: float = Field(default=0.0, ge=0.0)


class TeamStrengths(BaseModel):
    """Лог-линейные параметры: log λ1 = μ + att[A] - def[B] + γ, log λ2 = μ + att[B] - def[A]."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    mu: float
    att: dict[TeamId, float]
    defence: dict[TeamId, float] = Field(alias="def")
    gamma_home: float
    lambda3: float = Field(default=0.0, ge=0.0)

    @model_validator(mode="after")
    def check_constraints(self) -> "TeamStrengths":
        if set(self.att) != set(self.defence):
            raise ValueError("att and def must cover the same teams")
        if abs(sum(self.att.values())) > ZERO_SUM_TOL * max(1, len(self.att)):
            raise ValueError("attack strengths must sum to zero")
        if abs(sum(self.defence.values())) > ZERO_SUM_TOL * max(1, len(self.defence)):
            raise ValueError("defence strengths must sum to zero")
        return self


class ScoreGrid(BaseModel):
    """Усечённая таблица вероятностей счетов P(Y1=i, Y2=j), 0 <= i, j <= max_goals."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    max_goals: int = Field(ge=0)
    mass: np.ndarray
    truncation_deficit: float = Field(ge=0.0)

    @field_validator("mass")
    @classmethod
    def check_mass(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("mass must be a square matrix")
        if np.any(v < 0.0):
            raise ValueError("mass entries must be non-negative")
        v = v.copy()
        v.setflags(write=False)
        return v

    @property
    def total(self) -> float:
        return float(self.mass.sum())


class TrainingWindow(BaseModel):
    """Какие прошлые матчи попадают в обучение: `season`, `last_n_rounds:<n>` или `all`."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["season", "last_n_rounds", "all"]
    n: int | None = Field(default=None, ge=1)

    @classmethod
    def parse(cls, text: str) -> "TrainingWindow":
        raw = text.strip().lower()
        if raw in ("season", "all"):
            return cls(kind=raw)
        if raw.startswith("last_n_rounds:"):
            value = raw.split(":", 1)[1]
            if not value.isdigit() or int(value) < 1:
                raise ValueError(f"invalid round count in window {text!r}")
            return cls(kind="last_n_rounds", n=int(value))
        raise ValueError(f"unknown training window {text!r}")

    def __str__(self) -> str:
        return f"last_n_rounds:{self.n}" if self.kind == "last_n_rounds" else self.kind


class PoissonFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    strengths: TeamStrengths
    report: FitReport
    correlated: bool
