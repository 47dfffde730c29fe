from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from matchcast.schemas.match import TeamId


class BTParams(BaseModel):
    """Параметры модели Дэвидсона: силы команд, преимущество поля, склонность к ничьим."""

    model_config = ConfigDict(frozen=True)

    worth: dict[TeamId, float]
    gamma: float = Field(gt=0.0)
    nu: float = Field(ge=0.0)

    @model_validator(mode="after")
    def check_worths(self) -> "BTParams":
        if not self.worth:
            raise ValueError("worth map must not be empty")
        if any(not (v > 0.0 and math.isfinite(v)) for v in self.worth.values()):
            raise ValueError("worths must be positive")
        if abs(sum(self.worth.values()) - 1.0) > 1e-9:
            raise ValueError("worths must sum to 1")
        return self

    @classmethod
    def normalized(cls, worth: dict[str, float], gamma: float, nu: float) -> "BTParams":
        total = sum(worth.values())
        return cls(worth={t: v / total for t, v in worth.items()}, gamma=gamma, nu=nu)


class BoundaryFlags(BaseModel):
    model_config = ConfigDict(frozen=True)

    gamma: bool = False
    nu: bool = False
    lambda3: bool = False
    # команды, чья логарифмическая сила упёрлась в границу
    teams: list[str] = Field(default_factory=list)

    @property
    def any(self) -> bool:
        return self.gamma or self.nu or self.lambda3 or bool(self.teams)


class FitReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    log_likelihood: float
    iterations: int
    converged: bool
    gradient_norm: float
    tolerance: float
    n_matches: int
    boundary: BoundaryFlags = Field(default_factory=BoundaryFlags)
    message: str = ""

    @model_validator(mode="after")
    def check_convergence(self) -> "FitReport":
        if self.converged and self.gradient_norm > self.tolerance:
            raise ValueError("converged fit must satisfy the gradient tolerance")
        return self


class BTFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: BTParams
    report: FitReport
