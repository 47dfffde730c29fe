from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from matchcast.engines.davidson import bt_outcome_probs
from matchcast.engines.poisson import link_rates
from matchcast.schemas.davidson import BTParams
from matchcast.schemas.match import MatchRecord, Outcome, Prediction, Season
from matchcast.schemas.poisson import BivPoissonParams, TeamStrengths

# голы, которыми кодируется исход, когда модель знает только исход
_GOALS_FOR = {
    Outcome.HOME_WIN: (1, 0),
    Outcome.DRAW: (1, 1),
    Outcome.AWAY_WIN: (0, 1),
}


def double_round_robin(teams: Sequence[str], season: int = 2000) -> list[MatchRecord]:
    """
    Расписание "по кругу": T-1 туров первой половины, вторая половина зеркальная
    (хозяева и гости меняются). Нечётное число команд получает пустой слот.
    """
    names = list(teams)
    if len(names) < 2:
        raise ValueError("at least two teams are required")
    if len(set(names)) != len(names):
        raise ValueError("team names must be unique")
    slots: list[str | None] = names + ([None] if len(names) % 2 else [])
    n = len(slots)
    first_half: list[list[tuple[str, str]]] = []
    for r in range(n - 1):
        pairs = []
        for i in range(n // 2):
            a, b = slots[i], slots[n - 1 - i]
            if a is None or b is None:
                continue
            # чередуем хозяина у фиксированной команды
            if i == 0 and r % 2 == 1:
                a, b = b, a
            pairs.append((a, b))
        first_half.append(pairs)
        slots = [slots[0], slots[-1], *slots[1:-1]]

    rounds = n - 1
    fixtures = []
    for r, pairs in enumerate(first_half, start=1):
        for home, away in pairs:
            fixtures.append(MatchRecord(season=season, matchday=r, home=home, away=away))
    for r, pairs in enumerate(first_half, start=1):
        for home, away in pairs:
            fixtures.append(MatchRecord(season=season, matchday=r + rounds, home=away, away=home))
    return fixtures


def _with_goals(m: MatchRecord, home_goals: int, away_goals: int) -> MatchRecord:
    return m.model_copy(update={"home_goals": int(home_goals), "away_goals": int(away_goals)})


def draw_outcomes(
    fixtures: Sequence[MatchRecord],
    predict: Callable[[MatchRecord], Prediction],
    rng: np.random.Generator,
) -> list[MatchRecord]:
    """Исход каждого матча разыгрывается из его прогноза."""
    probs = np.array([predict(m).as_tuple() for m in fixtures]).reshape(-1, 3)
    u = rng.random(len(fixtures))
    idx = (u[:, None] > np.cumsum(probs, axis=1)[:, :2]).sum(axis=1)
    return [_with_goals(m, *_GOALS_FOR[Outcome(int(i) + 1)]) for m, i in zip(fixtures, idx)]


def simulate_davidson_season(
    params: BTParams,
    rng: np.random.Generator,
    season: int = 2000,
) -> Season:
    teams = sorted(params.worth)
    fixtures = double_round_robin(teams, season)
    played = draw_outcomes(fixtures, lambda m: bt_outcome_probs(params, m.home, m.away), rng)
    return Season.from_matches(season, played, teams)


def simulate_davidson_matches(
    params: BTParams,
    n_leagues: int,
    rng: np.random.Generator,
    first_season: int = 2000,
) -> list[MatchRecord]:
    """n_leagues независимых двойных кругов (каждый своим "сезоном")."""
    out: list[MatchRecord] = []
    for k in range(n_leagues):
        out.extend(simulate_davidson_season(params, rng, first_season + k).matches)
    return out


def sample_bivpois(p: BivPoissonParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """(size, 2) пар голов: Y1 = X1 + X3, Y2 = X2 + X3."""
    x3 = rng.poisson(p.lambda3, size) if p.lambda3 > 0 else np.zeros(size, dtype=int)
    return np.column_stack((rng.poisson(p.lambda1, size) + x3, rng.poisson(p.lambda2, size) + x3))


def simulate_poisson_season(
    strengths: TeamStrengths,
    rng: np.random.Generator,
    season: int = 2000,
) -> Season:
    teams = sorted(strengths.att)
    played = []
    for m in double_round_robin(teams, season):
        y1, y2 = sample_bivpois(link_rates(strengths, m.home, m.away), 1, rng)[0]
        played.append(_with_goals(m, y1, y2))
    return Season.from_matches(season, played, teams)


def simulate_poisson_matches(
    strengths: TeamStrengths,
    n_leagues: int,
    rng: np.random.Generator,
    first_season: int = 2000,
) -> list[MatchRecord]:
    out: list[MatchRecord] = []
    for k in range(n_leagues):
        out.extend(simulate_poisson_season(strengths, rng, first_season + k).matches)
    return out
