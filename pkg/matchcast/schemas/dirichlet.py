from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class DirichletParams(BaseModel):
    """Параметры концентрации для (победа, ничья, поражение)."""

    model_config = ConfigDict(frozen=True)

    a1: float = Field(gt=0.0)
    a2: float = Field(gt=0.0)
    a3: float = Field(gt=0.0)

    @classmethod
    def symmetric(cls, alpha: float) -> "DirichletParams":
        return cls(a1=alpha, a2=alpha, a3=alpha)

    @property
    def a_dot(self) -> float:
        return self.a1 + self.a2 + self.a3

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a1, self.a2, self.a3)


class PoolWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    # вес "наблюдателя" хозяев; гостевой получает 1 - w_home
    w_home: float = Field(ge=0.0, le=1.0)


class MnDir2Config(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0.0)
    weights: PoolWeights

    @property
    def w(self) -> float:
        return self.weights.w_home


def _strictly_increasing(values: list[float]) -> list[float]:
    if not values:
        raise ValueError("grid axis must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("grid axis must be strictly increasing")
    return values


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    w_points: list[float]
    alpha_points: list[float]

    @field_validator("w_points")
    @classmethod
    def check_w(cls, v: list[float]) -> list[float]:
        if any(not 0.0 <= w <= 1.0 for w in v):
            raise ValueError("w points must lie in [0, 1]")
        return _strictly_increasing(v)

    @field_validator("alpha_points")
    @classmethod
    def check_alpha(cls, v: list[float]) -> list[float]:
        if any(a <= 0.0 for a in v):
            raise ValueError("alpha points must be positive")
        return _strictly_increasing(v)

    @classmethod
    def equally_spaced(
        cls,
        n_w: int = 20,
        n_alpha: int = 20,
        alpha_min: float = 0.001,
        alpha_max: float = 20.0,
    ) -> "GridSpec":
        """w: n_w точек на [0, 1]; alpha: n_alpha точек от alpha_min до alpha_max."""
        return cls(
            w_points=np.linspace(0.0, 1.0, n_w).tolist(),
            alpha_points=np.linspace(alpha_min, alpha_max, n_alpha).tolist(),
        )
