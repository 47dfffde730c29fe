from __future__ import annotations

import math
import re
from enum import Enum, IntEnum
from typing import Annotated, Iterable

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, model_validator

_SPACES = re.compile(r"\s+")

SIMPLEX_TOL = 1e-9


def normalize_team_name(name: str) -> str:
    """trim + схлопывание пробелов + casefold."""
    norm = _SPACES.sub(" ", name.strip()).casefold()
    if not norm:
        raise ValueError("team name must not be empty")
    return norm


TeamId = Annotated[str, AfterValidator(normalize_team_name)]


class Outcome(IntEnum):
    HOME_WIN = 1
    DRAW = 2
    AWAY_WIN = 3


class Venue(str, Enum):
    home = "home"
    away = "away"


class MatchRecord(BaseModel):
    """Сыгранный или запланированный матч. Голы либо оба есть, либо оба пустые."""

    model_config = ConfigDict(frozen=True)

    season: int
    matchday: int = Field(ge=1)
    home: TeamId
    away: TeamId
    home_goals: int | None = Field(default=None, ge=0)
    away_goals: int | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def check_teams_and_goals(self) -> "MatchRecord":
        if self.home == self.away:
            raise ValueError("home and away team must differ")
        if (self.home_goals is None) != (self.away_goals is None):
            raise ValueError("goals must be both present or both absent")
        return self

    @property
    def is_played(self) -> bool:
        return self.home_goals is not None

    @property
    def key(self) -> tuple[int, int, str, str]:
        return (self.season, self.matchday, self.home, self.away)

    def as_fixture(self) -> "MatchRecord":
        if not self.is_played:
            return self
        return self.model_copy(update={"home_goals": None, "away_goals": None})


class Season(BaseModel):
    """Один чемпионат: матчи упорядочены по туру (внутри тура в порядке ввода)."""

    model_config = ConfigDict(frozen=True)

    year: int
    teams: frozenset[TeamId]
    matches: tuple[MatchRecord, ...] = ()

    @classmethod
    def from_matches(
        cls,
        year: int,
        matches: Iterable[MatchRecord],
        teams: Iterable[str] | None = None,
    ) -> "Season":
        ordered = sorted(matches, key=lambda m: m.matchday)
        names = set(teams or ())
        for m in ordered:
            if m.season != year:
                raise ValueError(f"match {m.key} does not belong to season {year}")
            names.update((m.home, m.away))
        return cls(year=year, teams=frozenset(names), matches=tuple(ordered))

    @property
    def rounds(self) -> int:
        return max((m.matchday for m in self.matches), default=0)

    @property
    def matchdays(self) -> list[int]:
        return sorted({m.matchday for m in self.matches})

    @property
    def first_half_rounds(self) -> int:
        return math.ceil(self.rounds / 2)

    def fixtures(self, matchday: int) -> list[MatchRecord]:
        return [m for m in self.matches if m.matchday == matchday]

    def played_before(self, matchday: int) -> list[MatchRecord]:
        return [m for m in self.matches if m.matchday < matchday and m.is_played]

    @property
    def is_double_round_robin(self) -> bool:
        n = len(self.teams)
        pairs = {(m.home, m.away) for m in self.matches}
        return n >= 2 and len(self.matches) == n * (n - 1) and len(pairs) == len(self.matches)

    @property
    def shape_warnings(self) -> list[str]:
        out: list[str] = []
        if not self.is_double_round_robin:
            out.append(
                f"season {self.year}: {len(self.matches)} matches for {len(self.teams)} teams "
                "is not a full double round robin"
            )
        return out


class CountVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    wins: int = Field(default=0, ge=0)
    draws: int = Field(default=0, ge=0)
    losses: int = Field(default=0, ge=0)

    @property
    def total(self) -> int:
        return self.wins + self.draws + self.losses

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.wins, self.draws, self.losses)

    def __add__(self, other: "CountVector") -> "CountVector":
        return CountVector(
            wins=self.wins + other.wins,
            draws=self.draws + other.draws,
            losses=self.losses + other.losses,
        )


class Prediction(BaseModel):
    """Точка на 2-симплексе: (победа хозяев, ничья, победа гостей)."""

    model_config = ConfigDict(frozen=True)

    p1: float = Field(ge=0.0, le=1.0)
    p2: float = Field(ge=0.0, le=1.0)
    p3: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def check_simplex(self) -> "Prediction":
        if abs(self.p1 + self.p2 + self.p3 - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"probabilities must sum to 1, got {self.p1 + self.p2 + self.p3!r}")
        return self

    @classmethod
    def from_weights(cls, w1: float, w2: float, w3: float) -> "Prediction":
        # мелкие отрицательные хвосты от округления обрезаем до нуля
        w1, w2, w3 = max(w1, 0.0), max(w2, 0.0), max(w3, 0.0)
        total = w1 + w2 + w3
        if total <= 0.0:
            raise ValueError("weights must have a positive sum")
        return cls(p1=w1 / total, p2=w2 / total, p3=w3 / total)

    @classmethod
    def trivial(cls) -> "Prediction":
        return cls(p1=1 / 3, p2=1 / 3, p3=1 / 3)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p1, self.p2, self.p3)

    def prob(self, outcome: Outcome) -> float:
        return self.as_tuple()[outcome - 1]

    def swapped(self) -> "Prediction":
        """Та же оценка с точки зрения другой команды."""
        return Prediction(p1=self.p3, p2=self.p2, p3=self.p1)
