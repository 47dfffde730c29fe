from __future__ import annotations

from matchcast.schemas.match import MatchRecord


def played(season: int, matchday: int, home: str, away: str, hg: int, ag: int) -> MatchRecord:
    return MatchRecord(
        season=season, matchday=matchday, home=home, away=away, home_goals=hg, away_goals=ag
    )


def fixture(season: int, matchday: int, home: str, away: str) -> MatchRecord:
    return MatchRecord(season=season, matchday=matchday, home=home, away=away)
