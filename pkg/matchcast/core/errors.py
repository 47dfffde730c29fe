from __future__ import annotations

from dataclasses import dataclass


class MatchcastError(Exception):
    """Базовая ошибка библиотеки; CLI превращает её в exit code 1."""


@dataclass(frozen=True)
class ParseIssue:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


class MatchParseError(MatchcastError):
    def __init__(self, issues: list[ParseIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


class DuplicateFixtureError(MatchParseError):
    pass


class SeasonShapeError(MatchcastError):
    pass


class UnknownTeamError(MatchcastError, KeyError):
    def __init__(self, team: str):
        self.team = team
        super().__init__(f"unknown team: {team!r}")

    def __str__(self) -> str:
        return self.args[0]


class NoResultError(MatchcastError):
    pass


class FitError(MatchcastError):
    pass


class InsufficientDataError(MatchcastError):
    pass


class ConfigError(MatchcastError):
    pass


class PredictorError(MatchcastError):
    pass


class GridTruncationError(MatchcastError):
    pass
