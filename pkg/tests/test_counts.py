import pytest

from matchcast.core.errors import NoResultError, UnknownTeamError
from matchcast.data.counts import (
    first_half_matchdays,
    outcome_of,
    second_half_matchdays,
    tally,
    venue_counts,
    with_outcomes,
)
from matchcast.data.synthetic import double_round_robin
from matchcast.schemas.match import CountVector, Outcome, Season, Venue
from tests.helpers import fixture, played


def test_outcome_of():
    assert outcome_of(played(2014, 1, "a", "b", 2, 1)) is Outcome.HOME_WIN
    assert outcome_of(played(2014, 1, "a", "b", 0, 0)) is Outcome.DRAW
    assert outcome_of(played(2014, 1, "a", "b", 0, 3)) is Outcome.AWAY_WIN
    with pytest.raises(NoResultError):
        outcome_of(fixture(2014, 1, "a", "b"))


def test_tally_is_from_each_team_perspective():
    matches = [
        played(2014, 1, "a", "b", 2, 0),
        played(2014, 2, "a", "c", 1, 1),
        played(2014, 3, "c", "b", 0, 1),
        fixture(2014, 4, "a", "b"),
    ]
    counts = tally(matches)
    assert counts[("a", Venue.home)] == CountVector(wins=1, draws=1, losses=0)
    assert counts[("b", Venue.away)] == CountVector(wins=1, draws=0, losses=1)
    assert counts[("c", Venue.away)] == CountVector(wins=0, draws=1, losses=0)
    assert counts[("c", Venue.home)] == CountVector(wins=0, draws=0, losses=1)
    assert ("b", Venue.home) not in counts


def test_with_outcomes_skips_scheduled():
    matches = [played(2014, 1, "a", "b", 2, 0), fixture(2014, 2, "b", "a")]
    assert [o for _, o in with_outcomes(matches)] == [Outcome.HOME_WIN]


def test_venue_counts_respects_matchday_cutoff():
    season = Season.from_matches(
        2014,
        [
            played(2014, 1, "a", "b", 2, 0),
            played(2014, 2, "a", "c", 0, 0),
            played(2014, 3, "a", "b", 0, 1),
        ],
    )
    assert venue_counts(season, "A", "home", 0) == CountVector()
    assert venue_counts(season, "a", Venue.home, 2) == CountVector(wins=1, draws=1)
    assert venue_counts(season, "a", "home", 3).total == 3


def test_venue_counts_errors():
    season = Season.from_matches(2014, [played(2014, 1, "a", "b", 2, 0)])
    with pytest.raises(UnknownTeamError):
        venue_counts(season, "zz", "home", 1)
    with pytest.raises(ValueError):
        venue_counts(season, "a", "home", -1)


def test_halves_of_a_twenty_team_season():
    teams = [f"t{i:02d}" for i in range(20)]
    season = Season.from_matches(2014, double_round_robin(teams, 2014))
    assert season.rounds == 38
    assert first_half_matchdays(season) == list(range(1, 20))
    assert second_half_matchdays(season) == list(range(20, 39))
    assert sum(len(season.fixtures(d)) for d in second_half_matchdays(season)) == 190


def test_home_tallies_cover_every_played_match(davidson_season):
    totals = tally(davidson_season.matches)
    played_count = sum(1 for m in davidson_season.matches if m.is_played)
    home = sum(c.total for (_, role), c in totals.items() if role is Venue.home)
    away = sum(c.total for (_, role), c in totals.items() if role is Venue.away)
    assert home == away == played_count


def test_venue_counts_never_decrease(davidson_season):
    for team in davidson_season.teams:
        for role in Venue:
            previous = (0, 0, 0)
            for md in range(0, davidson_season.rounds + 1):
                current = venue_counts(davidson_season, team, role, md).as_tuple()
                assert all(c >= p for c, p in zip(current, previous))
                previous = current
