from __future__ import annotations

import logging
from collections import defaultdict
from typing import Iterable, Mapping

from scipy.special import gammaincc

from matchcast.core.audit import FlagTrail, log_action
from matchcast.schemas.match import MatchRecord, Outcome, Prediction
from matchcast.schemas.reports import GofResult

logger = logging.getLogger(__name__)


def chi_square_p_value(statistic: float, df: int) -> float:
    """Верхний хвост хи-квадрат через регуляризованную неполную гамму Q(df/2, x/2)."""
    if df <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, max(statistic, 0.0) / 2.0))


def chi_square_gof(
    rows: Iterable[tuple[MatchRecord, Prediction, Outcome]],
    trail: FlagTrail | None = None,
) -> GofResult:
    """
    Сравнение ожидаемого и наблюдаемого числа побед каждой команды дома и в гостях:
    sum_t (e_t^H - o_t^H)^2 / e_t^H + (e_t^A - o_t^A)^2 / e_t^A.
    Слагаемые с нулевым ожиданием исключаются (и уменьшают df).
    """
    expected: dict[tuple[str, str], float] = defaultdict(float)
    observed: dict[tuple[str, str], int] = defaultdict(int)
    teams: set[str] = set()
    for m, p, outcome in rows:
        teams.update((m.home, m.away))
        expected[(m.home, "home")] += p.p1
        expected[(m.away, "away")] += p.p3
        observed[(m.home, "home")] += outcome is Outcome.HOME_WIN
        observed[(m.away, "away")] += outcome is Outcome.AWAY_WIN

    statistic = 0.0
    df = 0
    excluded: list[str] = []
    for team in sorted(teams):
        for venue in ("home", "away"):
            e = expected.get((team, venue), 0.0)
            o = observed.get((team, venue), 0)
            if e <= 0.0:
                excluded.append(f"{team}:{venue}")
                continue
            statistic += (e - o) ** 2 / e
            df += 1
    if excluded:
        log_action(
            trail,
            action="GOF_TERM_EXCLUDED",
            details=f"zero expected wins: {','.join(excluded)}",
        )
    return GofResult(
        statistic=statistic,
        df=df,
        p_value=chi_square_p_value(statistic, df),
        n_teams=len(teams),
        excluded=excluded,
    )


def pooled_gof(per_season: Mapping[int, GofResult]) -> GofResult:
    """Сумма статистик и степеней свободы по независимым сезонам."""
    statistic = sum(g.statistic for g in per_season.values())
    df = sum(g.df for g in per_season.values())
    return GofResult(
        statistic=statistic,
        df=df,
        p_value=chi_square_p_value(statistic, df),
        n_teams=sum(g.n_teams for g in per_season.values()),
        excluded=[f"{year}:{e}" for year, g in sorted(per_season.items()) for e in g.excluded],
    )
