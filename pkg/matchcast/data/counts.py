from __future__ import annotations

from collections import defaultdict
from typing import Iterable

from matchcast.core.errors import NoResultError, UnknownTeamError
from matchcast.schemas.match import (
    CountVector,
    MatchRecord,
    Outcome,
    Season,
    Venue,
    normalize_team_name,
)


def outcome_of(m: MatchRecord) -> Outcome:
    if not m.is_played:
        raise NoResultError(f"no result for {m.key}")
    if m.home_goals > m.away_goals:
        return Outcome.HOME_WIN
    if m.home_goals == m.away_goals:
        return Outcome.DRAW
    return Outcome.AWAY_WIN


def with_outcomes(matches: Iterable[MatchRecord]) -> list[tuple[MatchRecord, Outcome]]:
    """Только сыгранные матчи, в паре с исходом."""
    return [(m, outcome_of(m)) for m in matches if m.is_played]


def tally(matches: Iterable[MatchRecord]) -> dict[tuple[str, Venue], CountVector]:
    """
    (команда, роль) -> (победы, ничьи, поражения) с точки зрения этой команды.
    Несыгранные матчи пропускаются.
    """
    raw: dict[tuple[str, Venue], list[int]] = defaultdict(lambda: [0, 0, 0])
    for m in matches:
        if not m.is_played:
            continue
        outcome = outcome_of(m)
        home = raw[(m.home, Venue.home)]
        away = raw[(m.away, Venue.away)]
        if outcome is Outcome.HOME_WIN:
            home[0] += 1
            away[2] += 1
        elif outcome is Outcome.DRAW:
            home[1] += 1
            away[1] += 1
        else:
            home[2] += 1
            away[0] += 1
    return {k: CountVector(wins=v[0], draws=v[1], losses=v[2]) for k, v in raw.items()}


def venue_counts(season: Season, team: str, role: Venue | str, through_matchday: int) -> CountVector:
    if through_matchday < 0:
        raise ValueError("through_matchday must be >= 0")
    name = normalize_team_name(team)
    if name not in season.teams:
        raise UnknownTeamError(name)
    role = Venue(role)
    window = (m for m in season.matches if m.matchday <= through_matchday)
    return tally(window).get((name, role), CountVector())


def first_half_matchdays(season: Season) -> list[int]:
    half = season.first_half_rounds
    return [d for d in season.matchdays if d <= half]


def second_half_matchdays(season: Season) -> list[int]:
    """Туры строго после ceil(rounds / 2); для 38 туров это 20..38."""
    half = season.first_half_rounds
    return [d for d in season.matchdays if d > half]
