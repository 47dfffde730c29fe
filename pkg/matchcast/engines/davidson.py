from __future__ import annotations

import csv
import io
import logging
import math
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from matchcast.core.audit import FlagTrail, log_action
from matchcast.core.config import BTSettings
from matchcast.core.errors import FitError, InsufficientDataError, UnknownTeamError
from matchcast.core.optimize import maximize
from matchcast.data.counts import with_outcomes
from matchcast.schemas.davidson import BoundaryFlags, BTFit, BTParams, FitReport
from matchcast.schemas.match import MatchRecord, Outcome, Prediction, Season, normalize_team_name

logger = logging.getLogger(__name__)

# индексы исходов в массивах лог-членов: победа хозяев, победа гостей, ничья
_TERM_OF = {Outcome.HOME_WIN: 0, Outcome.AWAY_WIN: 1, Outcome.DRAW: 2}


def davidson_probs(pi_home: float, pi_away: float, gamma: float, nu: float) -> Prediction:
    """Вероятности для произвольных (не нормированных) сил."""
    if pi_home <= 0.0 or pi_away <= 0.0:
        raise ValueError("worths must be positive")
    win = gamma * pi_home
    loss = pi_away
    draw = nu * math.sqrt(pi_home * pi_away)
    return Prediction.from_weights(win, draw, loss)


def _worth(params: BTParams, team: str) -> float:
    name = normalize_team_name(team)
    try:
        return params.worth[name]
    except KeyError:
        raise UnknownTeamError(name) from None


def bt_outcome_probs(params: BTParams, home: str, away: str) -> Prediction:
    return davidson_probs(_worth(params, home), _worth(params, away), params.gamma, params.nu)


def bt_log_likelihood(
    params: BTParams,
    matches: Iterable[tuple[MatchRecord, Outcome]],
    trail: FlagTrail | None = None,
) -> float:
    total = 0.0
    for m, outcome in matches:
        p = bt_outcome_probs(params, m.home, m.away).prob(outcome)
        if p <= 0.0:
            log_action(
                trail,
                action="ZERO_PROBABILITY_OUTCOME",
                entity=f"{m.season}:{m.matchday}:{m.home}-{m.away}",
                details=f"outcome {outcome.name} has probability 0",
            )
            return -math.inf
        total += math.log(p)
    return total


class DavidsonLikelihood:
    """
    Лог-правдоподобие в свободной параметризации:
    theta = (b_2..b_T, log gamma[, log nu]), b_1 = 0 у опорной команды.
    """

    def __init__(
        self,
        matches: Sequence[tuple[MatchRecord, Outcome]],
        teams: Iterable[str] | None = None,
        fit_ties: bool = True,
    ):
        names = set(teams or ())
        for m, _ in matches:
            names.update((m.home, m.away))
        self.teams = sorted(names)
        if len(self.teams) < 2:
            raise InsufficientDataError("at least two teams are required")
        index = {t: i for i, t in enumerate(self.teams)}
        self.fit_ties = fit_ties
        self.home = np.array([index[m.home] for m, _ in matches], dtype=int)
        self.away = np.array([index[m.away] for m, _ in matches], dtype=int)
        self.observed = np.array([_TERM_OF[o] for _, o in matches], dtype=int)
        if not fit_ties and np.any(self.observed == _TERM_OF[Outcome.DRAW]):
            raise FitError("draws present but the tie parameter is fixed at zero")

    @property
    def n_params(self) -> int:
        return len(self.teams) - 1 + (2 if self.fit_ties else 1)

    @property
    def n_matches(self) -> int:
        return int(self.home.size)

    def initial(self) -> np.ndarray:
        # равные силы, gamma = 1, nu = 1
        return np.zeros(self.n_params)

    def _split(self, theta: np.ndarray) -> tuple[np.ndarray, float, float]:
        t = len(self.teams)
        b = np.concatenate(([0.0], theta[: t - 1]))
        log_gamma = float(theta[t - 1])
        log_nu = float(theta[t]) if self.fit_ties else -math.inf
        return b, log_gamma, log_nu

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        b, log_gamma, log_nu = self._split(theta)
        bi, bj = b[self.home], b[self.away]
        terms = np.column_stack((
            log_gamma + bi,
            bj,
            np.full_like(bi, log_nu) + 0.5 * (bi + bj),
        ))
        norm = logsumexp(terms, axis=1)
        rows = np.arange(self.n_matches)
        value = float(np.sum(terms[rows, self.observed] - norm))

        # d(log p_obs)/d(term_k) = 1{k = obs} - softmax_k
        resid = -softmax(terms, axis=1)
        resid[rows, self.observed] += 1.0
        t = len(self.teams)
        g_b = np.zeros(t)
        np.add.at(g_b, self.home, resid[:, 0] + 0.5 * resid[:, 2])
        np.add.at(g_b, self.away, resid[:, 1] + 0.5 * resid[:, 2])
        grad = [g_b[1:], [resid[:, 0].sum()]]
        if self.fit_ties:
            grad.append([resid[:, 2].sum()])
        return value, np.concatenate(grad)

    def to_params(self, theta: np.ndarray) -> BTParams:
        b, log_gamma, log_nu = self._split(np.asarray(theta, dtype=float))
        worth = np.exp(b - b.max())
        return BTParams.normalized(
            {team: float(w) for team, w in zip(self.teams, worth)},
            gamma=math.exp(log_gamma),
            nu=math.exp(log_nu) if self.fit_ties else 0.0,
        )

    def from_params(self, params: BTParams) -> np.ndarray:
        ref = math.log(params.worth[self.teams[0]])
        theta = [math.log(params.worth[t]) - ref for t in self.teams[1:]]
        theta.append(math.log(params.gamma))
        if self.fit_ties:
            theta.append(math.log(params.nu))
        return np.asarray(theta)

    def divergent(self) -> BoundaryFlags:
        """
        Направления, где правдоподобие растёт без предела: ОМП лежит на границе,
        даже если оптимизатор остановился раньше клэмпа.
        """
        counts = np.zeros((len(self.teams), 3), dtype=int)
        np.add.at(counts, (self.home, self.observed), 1)
        # у гостей победа и поражение меняются местами
        np.add.at(counts, (self.away, np.array([1, 0, 2])[self.observed]), 1)
        played = counts.sum(axis=1) > 0
        wins, losses, draws = counts[:, 0], counts[:, 1], counts[:, 2]
        one_sided = played & (draws == 0) & ((wins == 0) | (losses == 0))
        totals = np.bincount(self.observed, minlength=3)
        return BoundaryFlags(
            # без побед хозяев gamma -> 0; одни победы хозяев без ничьих: gamma -> inf
            gamma=bool(totals[0] == 0 or (totals[1] == 0 and totals[2] == 0)),
            nu=bool(self.fit_ties and (totals[2] == 0 or totals[0] + totals[1] == 0)),
            teams=[t for t, hit in zip(self.teams, one_sided) if hit],
        )


def bt_fit(
    matches: Sequence[tuple[MatchRecord, Outcome]],
    settings: BTSettings | None = None,
    *,
    fit_ties: bool = True,
    teams: Iterable[str] | None = None,
    trail: FlagTrail | None = None,
) -> BTFit:
    """
    ML-оценка (силы, gamma, nu). Детерминирована: старт из равных сил, gamma = nu = 1.
    Оценки на границе [-bound, bound] в лог-шкале помечаются флагами.
    """
    settings = settings or BTSettings()
    if not matches:
        raise InsufficientDataError("no played matches to fit")
    lik = DavidsonLikelihood(matches, teams=teams, fit_ties=fit_ties)
    res = maximize(
        lik,
        lik.initial(),
        bound=settings.bound,
        tol=settings.tol,
        max_iter=settings.max_iter,
        scale=lik.n_matches,
    )
    t = len(lik.teams)
    clamped = {team for team, hit in zip(lik.teams[1:], res.at_bound[: t - 1]) if hit}
    structural = lik.divergent()
    boundary = BoundaryFlags(
        gamma=bool(res.at_bound[t - 1]) or structural.gamma,
        nu=(bool(res.at_bound[t]) or structural.nu) if fit_ties else False,
        teams=sorted(clamped | set(structural.teams)),
    )
    report = FitReport(
        log_likelihood=res.value,
        iterations=res.iterations,
        converged=res.converged,
        gradient_norm=res.gradient_norm,
        tolerance=settings.tol,
        n_matches=lik.n_matches,
        boundary=boundary,
        message=res.message,
    )
    if boundary.any:
        log_action(trail, action="BOUNDARY_ESTIMATE", entity="bt", details=_boundary_text(boundary))
    if not report.converged:
        log_action(
            trail,
            action="FIT_NOT_CONVERGED",
            entity="bt",
            details=f"|g|={report.gradient_norm:.3g} after {report.iterations} iterations",
        )
    return BTFit(params=lik.to_params(res.x), report=report)


def _boundary_text(b: BoundaryFlags) -> str:
    parts = [name for name in ("gamma", "nu", "lambda3") if getattr(b, name)]
    if b.teams:
        parts.append("teams=" + "|".join(b.teams))
    return ",".join(parts)


def bt_rolling_fit(
    season: Season,
    matchday: int,
    settings: BTSettings | None = None,
    trail: FlagTrail | None = None,
) -> BTFit:
    """Фит по всем сыгранным матчам сезона с туром < matchday (обе половины)."""
    played = with_outcomes(season.played_before(matchday))
    if not played:
        raise InsufficientDataError(f"season {season.year}: nothing played before matchday {matchday}")
    return bt_fit(played, settings, teams=season.teams, trail=trail)


def bt_rolling_predict(
    season: Season,
    matchday: int,
    settings: BTSettings | None = None,
    trail: FlagTrail | None = None,
) -> dict[tuple[int, int, str, str], Prediction]:
    fit = bt_rolling_fit(season, matchday, settings, trail)
    return {
        m.key: bt_outcome_probs(fit.params, m.home, m.away)
        for m in season.fixtures(matchday)
    }


def export_bt_fit(fit: BTFit) -> str:
    """CSV `team,worth` и подвал `gamma,nu`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["team", "worth"])
    for team in sorted(fit.params.worth):
        writer.writerow([team, repr(fit.params.worth[team])])
    writer.writerow(["gamma", "nu"])
    writer.writerow([repr(fit.params.gamma), repr(fit.params.nu)])
    return buf.getvalue()
