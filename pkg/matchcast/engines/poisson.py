from __future__ import annotations

import csv
import io
import logging
import math
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import poisson

from matchcast.core.audit import FlagTrail, log_action
from matchcast.core.config import PoissonSettings
from matchcast.core.errors import (
    GridTruncationError,
    InsufficientDataError,
    NoResultError,
    UnknownTeamError,
)
from matchcast.core.optimize import maximize
from matchcast.schemas.davidson import BoundaryFlags, FitReport
from matchcast.schemas.match import MatchRecord, Prediction, Season, normalize_team_name
from matchcast.schemas.poisson import (
    BivPoissonParams,
    PoissonFit,
    ScoreGrid,
    TeamStrengths,
    TrainingWindow,
)

logger = logging.getLogger(__name__)

MAX_GRID_DEFICIT = 1e-6
_INITIAL_LAMBDA3 = 0.1
# градиент по log lambda3 пропорционален lambda3: ниже порога считаем оценку граничной
LAMBDA3_FLOOR = 1e-6


# ---------- PMF ----------
def _log_kernel(
    l1: np.ndarray,
    l2: np.ndarray,
    l3: np.ndarray,
    y1: np.ndarray,
    y2: np.ndarray,
) -> np.ndarray:
    """
    log sum_k l1^(y1-k) l2^(y2-k) l3^k / ((y1-k)! (y2-k)! k!), без множителя exp(-sum l).
    -inf там, где y1 < 0 или y2 < 0.
    """
    l1, l2, l3, y1, y2 = np.broadcast_arrays(
        np.asarray(l1, dtype=float),
        np.asarray(l2, dtype=float),
        np.asarray(l3, dtype=float),
        np.asarray(y1, dtype=int),
        np.asarray(y2, dtype=int),
    )
    out = np.full(l1.shape, -np.inf)
    valid = (y1 >= 0) & (y2 >= 0)
    if not valid.any():
        return out
    top = int(np.minimum(y1[valid], y2[valid]).max())
    k = np.arange(top + 1)
    kmax = np.minimum(y1, y2)[..., None]
    a = y1[..., None] - k
    b = y2[..., None] - k
    use = valid[..., None] & (k <= kmax)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_l3 = np.where(l3 > 0.0, np.log(np.where(l3 > 0.0, l3, 1.0)), -np.inf)[..., None]
        k_term = np.where(k == 0, 0.0, k * log_l3)
        terms = (
            np.where(use, a, 0) * np.log(l1)[..., None]
            + np.where(use, b, 0) * np.log(l2)[..., None]
            + k_term
            - gammaln(np.where(use, a, 0) + 1)
            - gammaln(np.where(use, b, 0) + 1)
            - gammaln(k + 1)
        )
        terms = np.where(use, terms, -np.inf)
        total = np.asarray(logsumexp(terms, axis=-1))
    out[valid] = total[valid]
    return out


def bivpois_logpmf(p: BivPoissonParams, y1: int, y2: int) -> float:
    if y1 < 0 or y2 < 0:
        raise ValueError("goal counts must be non-negative")
    total_rate = p.lambda1 + p.lambda2 + p.lambda3
    return float(-total_rate + _log_kernel(p.lambda1, p.lambda2, p.lambda3, y1, y2))


def bivpois_pmf(p: BivPoissonParams, y1: int, y2: int) -> float:
    return math.exp(bivpois_logpmf(p, y1, y2))


# ---------- LINKS ----------
def link_rates(s: TeamStrengths, home: str, away: str) -> BivPoissonParams:
    h, a = normalize_team_name(home), normalize_team_name(away)
    for team in (h, a):
        if team not in s.att:
            raise UnknownTeamError(team)
    return BivPoissonParams(
        lambda1=math.exp(s.mu + s.att[h] - s.defence[a] + s.gamma_home),
        lambda2=math.exp(s.mu + s.att[a] - s.defence[h]),
        lambda3=s.lambda3,
    )


# ---------- SCORE GRID ----------
def score_grid(p: BivPoissonParams, tail_tol: float = 1e-10) -> ScoreGrid:
    """
    Наименьшая сетка 0..N, у которой оценка хвостов маргиналей
    P(Y1 > N) + P(Y2 > N) не больше tail_tol.
    """
    if not 0.0 < tail_tol <= 1e-3:
        raise ValueError("tail_tol must lie in (0, 1e-3]")
    m1, m2 = p.lambda1 + p.lambda3, p.lambda2 + p.lambda3
    upper = int(max(poisson.isf(tail_tol / 2, m1), poisson.isf(tail_tol / 2, m2), 0)) + 1
    ns = np.arange(upper + 1)
    bound = poisson.sf(ns, m1) + poisson.sf(ns, m2)
    n = int(ns[np.argmax(bound <= tail_tol)])

    goals = np.arange(n + 1)
    p1 = poisson.pmf(goals, p.lambda1)
    p2 = poisson.pmf(goals, p.lambda2)
    if p.lambda3 > 0.0:
        # Y1 = X1 + X3, Y2 = X2 + X3: свёртка по общему слагаемому k
        p3 = poisson.pmf(goals, p.lambda3)
        mass = np.zeros((n + 1, n + 1))
        for k in range(n + 1):
            mass[k:, k:] += p3[k] * np.outer(p1[: n + 1 - k], p2[: n + 1 - k])
    else:
        mass = np.outer(p1, p2)
    deficit = max(0.0, 1.0 - float(mass.sum()))
    return ScoreGrid(max_goals=n, mass=mass, truncation_deficit=deficit)


def outcome_probs_from_grid(g: ScoreGrid) -> Prediction:
    if g.truncation_deficit > MAX_GRID_DEFICIT:
        raise GridTruncationError(
            f"grid deficit {g.truncation_deficit:.3g} exceeds {MAX_GRID_DEFICIT:g}"
        )
    mass = g.mass
    # строка = голы хозяев, столбец = голы гостей
    return Prediction.from_weights(
        float(np.tril(mass, -1).sum()),
        float(np.trace(mass)),
        float(np.triu(mass, 1).sum()),
    )


def match_probs(s: TeamStrengths, home: str, away: str, tail_tol: float = 1e-10) -> Prediction:
    return outcome_probs_from_grid(score_grid(link_rates(s, home, away), tail_tol))


# ---------- LIKELIHOOD ----------
class PoissonLikelihood:
    """
    theta = (mu, gamma, att_1..att_{T-1}, def_1..def_{T-1}[, log lambda3]).
    Последняя команда получает att = -sum(остальных), def аналогично.
    """

    def __init__(self, matches: Sequence[MatchRecord], correlated: bool):
        for m in matches:
            if not m.is_played:
                raise NoResultError(f"no result for {m.key}")
        self.teams = sorted({t for m in matches for t in (m.home, m.away)})
        if len(self.teams) < 2:
            raise InsufficientDataError("at least two teams are required")
        index = {t: i for i, t in enumerate(self.teams)}
        self.correlated = correlated
        self.home = np.array([index[m.home] for m in matches], dtype=int)
        self.away = np.array([index[m.away] for m in matches], dtype=int)
        self.y1 = np.array([m.home_goals for m in matches], dtype=int)
        self.y2 = np.array([m.away_goals for m in matches], dtype=int)
        t = len(self.teams)
        # полная сила = constraint @ свободные
        self.constraint = np.vstack((np.eye(t - 1), -np.ones((1, t - 1))))

    @property
    def n_params(self) -> int:
        return 2 + 2 * (len(self.teams) - 1) + (1 if self.correlated else 0)

    @property
    def n_matches(self) -> int:
        return int(self.home.size)

    def initial(self) -> np.ndarray:
        mean_goals = float(np.mean(np.concatenate((self.y1, self.y2))))
        theta = np.zeros(self.n_params)
        theta[0] = math.log(max(mean_goals, 0.1))
        if self.correlated:
            theta[-1] = math.log(_INITIAL_LAMBDA3)
        return theta

    def _split(self, theta: np.ndarray) -> tuple[float, float, np.ndarray, np.ndarray, float]:
        t = len(self.teams)
        mu, gamma = float(theta[0]), float(theta[1])
        att = self.constraint @ theta[2 : 1 + t]
        defence = self.constraint @ theta[1 + t : 2 * t]
        lambda3 = math.exp(theta[-1]) if self.correlated else 0.0
        return mu, gamma, att, defence, lambda3

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        mu, gamma, att, defence, lambda3 = self._split(theta)
        eta1 = mu + gamma + att[self.home] - defence[self.away]
        eta2 = mu + att[self.away] - defence[self.home]
        l1, l2 = np.exp(eta1), np.exp(eta2)
        l3 = np.full_like(l1, lambda3)

        base = _log_kernel(l1, l2, l3, self.y1, self.y2)
        value = float(np.sum(-(l1 + l2 + l3) + base))

        # d log f / d lambda_r = f(shifted) / f - 1
        r1 = np.exp(_log_kernel(l1, l2, l3, self.y1 - 1, self.y2) - base)
        r2 = np.exp(_log_kernel(l1, l2, l3, self.y1, self.y2 - 1) - base)
        d_eta1 = l1 * (r1 - 1.0)
        d_eta2 = l2 * (r2 - 1.0)

        t = len(self.teams)
        g_att = np.zeros(t)
        g_def = np.zeros(t)
        np.add.at(g_att, self.home, d_eta1)
        np.add.at(g_att, self.away, d_eta2)
        np.add.at(g_def, self.away, -d_eta1)
        np.add.at(g_def, self.home, -d_eta2)
        grad = [
            [d_eta1.sum() + d_eta2.sum(), d_eta1.sum()],
            self.constraint.T @ g_att,
            self.constraint.T @ g_def,
        ]
        if self.correlated:
            r3 = np.exp(_log_kernel(l1, l2, l3, self.y1 - 1, self.y2 - 1) - base)
            grad.append([float(np.sum(lambda3 * (r3 - 1.0)))])
        return value, np.concatenate(grad)

    def to_strengths(self, theta: np.ndarray) -> TeamStrengths:
        mu, gamma, att, defence, lambda3 = self._split(np.asarray(theta, dtype=float))
        return TeamStrengths(
            mu=mu,
            att={team: float(v) for team, v in zip(self.teams, att)},
            defence={team: float(v) for team, v in zip(self.teams, defence)},
            gamma_home=gamma,
            lambda3=lambda3,
        )


def poisson_fit(
    matches: Sequence[MatchRecord],
    correlated: bool,
    settings: PoissonSettings | None = None,
    trail: FlagTrail | None = None,
) -> PoissonFit:
    """correlated=False: независимые голы (lambda3 = 0); correlated=True добавляет общий шок lambda3."""
    settings = settings or PoissonSettings()
    if not matches:
        raise InsufficientDataError("no played matches to fit")
    lik = PoissonLikelihood(matches, correlated)
    res = maximize(
        lik,
        lik.initial(),
        bound=settings.bound,
        tol=settings.tol,
        max_iter=settings.max_iter,
        scale=lik.n_matches,
    )
    t = len(lik.teams)
    free_teams = lik.teams[:-1]
    hit_att = res.at_bound[2 : 1 + t]
    hit_def = res.at_bound[1 + t : 2 * t]
    boundary = BoundaryFlags(
        gamma=bool(res.at_bound[1]),
        lambda3=correlated and (bool(res.at_bound[-1]) or math.exp(res.x[-1]) < LAMBDA3_FLOOR),
        teams=[team for team, a, d in zip(free_teams, hit_att, hit_def) if a or d],
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
    entity = "poisson-biv" if correlated else "poisson-lee"
    if boundary.any:
        log_action(trail, action="BOUNDARY_ESTIMATE", entity=entity, details=_boundary_text(boundary))
    if not report.converged:
        log_action(
            trail,
            action="FIT_NOT_CONVERGED",
            entity=entity,
            details=f"|g|={report.gradient_norm:.3g} after {report.iterations} iterations",
        )
    return PoissonFit(strengths=lik.to_strengths(res.x), report=report, correlated=correlated)


def _boundary_text(b: BoundaryFlags) -> str:
    parts = [name for name in ("gamma", "lambda3") if getattr(b, name)]
    if b.teams:
        parts.append("teams=" + "|".join(b.teams))
    return ",".join(parts)


# ---------- ROLLING ----------
def training_matches(
    season: Season,
    matchday: int,
    window: TrainingWindow,
    history: Iterable[Season] = (),
) -> list[MatchRecord]:
    """
    Сыгранные матчи для фита перед туром `matchday`.
    season: только текущий сезон; all: плюс все прошлые сезоны;
    last_n_rounds:n: последние n туров по оси (сезон, тур), через границу сезонов.
    """
    current = season.played_before(matchday)
    if window.kind == "season":
        return current
    earlier = [
        m
        for s in sorted(history, key=lambda s: s.year)
        if s.year < season.year
        for m in s.matches
        if m.is_played
    ]
    pool = earlier + current
    if window.kind == "all":
        return pool
    rounds = sorted({(m.season, m.matchday) for m in pool})[-window.n :]
    keep = set(rounds)
    return [m for m in pool if (m.season, m.matchday) in keep]


def _with_teams(s: TeamStrengths, teams: Iterable[str], trail: FlagTrail | None) -> TeamStrengths:
    # команды без матчей в окне получают средние силы (0), сумма остаётся нулевой
    missing = sorted(set(teams) - set(s.att))
    if not missing:
        return s
    log_action(trail, action="TEAM_WITHOUT_HISTORY", entity="poisson", details="|".join(missing))
    return TeamStrengths(
        mu=s.mu,
        att={**s.att, **{t: 0.0 for t in missing}},
        defence={**s.defence, **{t: 0.0 for t in missing}},
        gamma_home=s.gamma_home,
        lambda3=s.lambda3,
    )


def poisson_rolling_fit(
    season: Season,
    matchday: int,
    correlated: bool,
    window: TrainingWindow,
    history: Iterable[Season] = (),
    settings: PoissonSettings | None = None,
    trail: FlagTrail | None = None,
) -> PoissonFit:
    train = training_matches(season, matchday, window, history)
    if not train:
        raise InsufficientDataError(
            f"season {season.year}: no matches in window {window} before matchday {matchday}"
        )
    fit = poisson_fit(train, correlated, settings, trail)
    return fit.model_copy(update={"strengths": _with_teams(fit.strengths, season.teams, trail)})


def poisson_rolling_predict(
    season: Season,
    matchday: int,
    correlated: bool,
    window: TrainingWindow,
    history: Iterable[Season] = (),
    settings: PoissonSettings | None = None,
    trail: FlagTrail | None = None,
) -> dict[tuple[int, int, str, str], Prediction]:
    settings = settings or PoissonSettings()
    fit = poisson_rolling_fit(season, matchday, correlated, window, history, settings, trail)
    return {
        m.key: match_probs(fit.strengths, m.home, m.away, settings.tail_tol)
        for m in season.fixtures(matchday)
    }


def export_poisson_fit(fit: PoissonFit) -> str:
    """CSV `team,att,def` и подвал `mu,gamma,lambda3`."""
    s = fit.strengths
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["team", "att", "def"])
    for team in sorted(s.att):
        writer.writerow([team, repr(s.att[team]), repr(s.defence[team])])
    writer.writerow(["mu", "gamma", "lambda3"])
    writer.writerow([repr(s.mu), repr(s.gamma_home), repr(s.lambda3)])
    return buf.getvalue()
