from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel, ConfigDict, ValidationError

from matchcast.core.errors import (
    DuplicateFixtureError,
    MatchParseError,
    ParseIssue,
    SeasonShapeError,
)
from matchcast.schemas.match import MatchRecord, Season

logger = logging.getLogger(__name__)

HEADER = ["season", "matchday", "home", "away", "home_goals", "away_goals"]

FULL_SEASON_MATCHES = 380


def _describe(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err.get("loc", ()) if x != "__root__")
        msg = err.get("msg", "invalid value").removeprefix("Value error, ")
        parts.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(parts)


def _parse_int(value: str, field: str) -> int | None:
    value = value.strip()
    if not value:
        return None
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{field}: expected an integer, got {value!r}") from None


def _parse_rows(csv_text: str) -> tuple[list[tuple[int, MatchRecord]], list[ParseIssue], list[ParseIssue]]:
    issues: list[ParseIssue] = []
    duplicates: list[ParseIssue] = []
    records: list[tuple[int, MatchRecord]] = []

    # выгрузка из Excel начинается с BOM
    reader = csv.reader(io.StringIO(csv_text.removeprefix("\ufeff")))
    header = next(reader, None)
    if header is None:
        return records, [ParseIssue(1, "empty file, header expected")], duplicates
    if [h.strip().lower() for h in header] != HEADER:
        issues.append(ParseIssue(1, f"bad header {header!r}, expected {','.join(HEADER)}"))
        return records, issues, duplicates

    seen: dict[tuple[int, int, str, str], int] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(HEADER):
            issues.append(ParseIssue(line, f"expected {len(HEADER)} fields, got {len(row)}"))
            continue
        season, matchday, home, away, home_goals, away_goals = row
        try:
            hg = _parse_int(home_goals, "home_goals")
            ag = _parse_int(away_goals, "away_goals")
            if (hg is not None and hg < 0) or (ag is not None and ag < 0):
                raise ValueError("goals must be non-negative")
            season_i = _parse_int(season, "season")
            matchday_i = _parse_int(matchday, "matchday")
            if season_i is None or matchday_i is None:
                raise ValueError("season and matchday are required")
            rec = MatchRecord(
                season=season_i,
                matchday=matchday_i,
                home=home,
                away=away,
                home_goals=hg,
                away_goals=ag,
            )
        except ValidationError as e:
            issues.append(ParseIssue(line, _describe(e)))
            continue
        except ValueError as e:
            issues.append(ParseIssue(line, str(e)))
            continue

        if rec.key in seen:
            duplicates.append(
                ParseIssue(line, f"duplicate fixture {rec.key}, first seen on line {seen[rec.key]}")
            )
            continue
        seen[rec.key] = line
        records.append((line, rec))
    return records, issues, duplicates


def parse_matches(csv_text: str) -> list[MatchRecord]:
    """Один MatchRecord на строку данных, порядок ввода сохраняется."""
    records, issues, duplicates = _parse_rows(csv_text)
    if issues:
        raise MatchParseError(issues + duplicates)
    if duplicates:
        raise DuplicateFixtureError(duplicates)
    return [rec for _, rec in records]


def serialize_matches(matches: Iterable[MatchRecord]) -> str:
    """Канонический CSV: нормализованные имена, пустые голы у несыгранных матчей."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for m in matches:
        writer.writerow([
            m.season,
            m.matchday,
            m.home,
            m.away,
            "" if m.home_goals is None else m.home_goals,
            "" if m.away_goals is None else m.away_goals,
        ])
    return buf.getvalue()


def read_matches(path: str | Path) -> list[MatchRecord]:
    return parse_matches(Path(path).read_text(encoding="utf-8-sig"))


def build_seasons(matches: Iterable[MatchRecord], strict: bool = False) -> list[Season]:
    """Группирует матчи по сезонам (по возрастанию года)."""
    by_year: dict[int, list[MatchRecord]] = defaultdict(list)
    for m in matches:
        by_year[m.season].append(m)
    seasons = []
    for year in sorted(by_year):
        season = Season.from_matches(year, by_year[year])
        if strict and len(season.matches) != FULL_SEASON_MATCHES:
            raise SeasonShapeError(
                f"season {year} has {len(season.matches)} matches, "
                f"strict mode expects {FULL_SEASON_MATCHES}"
            )
        for warning in season.shape_warnings:
            logger.warning(warning)
        seasons.append(season)
    return seasons


# ---------- VALIDATION SUMMARY ----------
class SeasonSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    year: int
    teams: int
    matches: int
    played: int
    rounds: int
    complete: bool
    scheduled_first_half: list[str]
    scheduled_second_half: int


class ValidationSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    issues: list[ParseIssue]
    seasons: list[SeasonSummary]

    @property
    def ok(self) -> bool:
        return not self.issues


def validate_matches(csv_text: str) -> ValidationSummary:
    """Проверка схемы, дублей и полноты сезонов; ошибки собираются, а не бросаются."""
    records, issues, duplicates = _parse_rows(csv_text)
    seasons = build_seasons(rec for _, rec in records)
    summaries = []
    for s in seasons:
        half = s.first_half_rounds
        summaries.append(
            SeasonSummary(
                year=s.year,
                teams=len(s.teams),
                matches=len(s.matches),
                played=sum(m.is_played for m in s.matches),
                rounds=s.rounds,
                complete=s.is_double_round_robin,
                scheduled_first_half=[
                    f"{m.matchday}:{m.home}-{m.away}"
                    for m in s.matches
                    if not m.is_played and m.matchday <= half
                ],
                scheduled_second_half=sum(
                    1 for m in s.matches if not m.is_played and m.matchday > half
                ),
            )
        )
    return ValidationSummary(
        issues=sorted(issues + duplicates, key=lambda i: i.line),
        seasons=summaries,
    )
