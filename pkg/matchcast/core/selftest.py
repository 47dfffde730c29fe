from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import poisson

from matchcast.core.config import CalibrationSettings, DirichletSettings
from matchcast.data.counts import outcome_of, venue_counts, with_outcomes
from matchcast.data.synthetic import (
    double_round_robin,
    draw_outcomes,
    sample_bivpois,
    simulate_davidson_matches,
    simulate_davidson_season,
    simulate_poisson_matches,
)
from matchcast.engines.davidson import DavidsonLikelihood, bt_fit
from matchcast.engines.dirichlet import cv_select, mn_dir1_predict, mn_dir2_predict, posterior
from matchcast.engines.poisson import bivpois_pmf, poisson_fit, score_grid
from matchcast.evaluation.calibration import calibration_curve
from matchcast.evaluation.export import render_report_json, scores_frame
from matchcast.evaluation.gof import chi_square_gof
from matchcast.evaluation.harness import evaluate
from matchcast.evaluation.predictors import (
    DavidsonPredictor,
    MnDir1Predictor,
    MnDir2Predictor,
    SeasonView,
    TrivialPredictor,
)
from matchcast.evaluation.scoring import brier, log_score, spherical
from matchcast.schemas.davidson import BTParams
from matchcast.schemas.dirichlet import DirichletParams, GridSpec, MnDir2Config, PoolWeights
from matchcast.schemas.match import CountVector, Outcome, Prediction, Season
from matchcast.schemas.poisson import BivPoissonParams, TeamStrengths

logger = logging.getLogger(__name__)

Check = Callable[[np.random.Generator], tuple[bool, str]]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


# ---------- CHECKS ----------
def check_worked_example(rng: np.random.Generator) -> tuple[bool, str]:
    p = mn_dir1_predict(CountVector(wins=6, draws=2, losses=1), CountVector(wins=2, draws=3, losses=4))
    target = (0.5, 0.2916667, 0.2083333)
    err = max(abs(a - b) for a, b in zip(p.as_tuple(), target))
    return err <= 5e-5, f"prediction={tuple(round(v, 6) for v in p.as_tuple())} max_err={err:.2e}"


def check_scoring_golden(rng: np.random.Generator) -> tuple[bool, str]:
    p = Prediction(p1=0.25, p2=0.35, p3=0.40)
    t = Prediction.trivial()
    errs = [
        abs(brier(Outcome.AWAY_WIN, p) - 0.545),
        abs(log_score(Outcome.AWAY_WIN, p) + math.log(0.4)),
        abs(spherical(Outcome.AWAY_WIN, p) + 0.4 / math.sqrt(0.345)),
        abs(brier(Outcome.DRAW, t) - 2.0 / 3.0),
        abs(log_score(Outcome.DRAW, t) - math.log(3.0)),
        abs(spherical(Outcome.DRAW, t) + 1.0 / math.sqrt(3.0)),
    ]
    return max(errs) <= 1e-12, f"max_err={max(errs):.2e}"


def simplex_grid(step: float = 0.05) -> np.ndarray:
    n = int(round(1.0 / step))
    pts = [(i, j, n - i - j) for i in range(n + 1) for j in range(n + 1 - i)]
    return np.asarray(pts, dtype=float) / n


def rule_table(points: np.ndarray) -> dict[str, np.ndarray]:
    """Баллы S(x, P) для каждой точки P сетки, shape (len(points), 3)."""
    with np.errstate(divide="ignore"):
        log = -np.log(points)
    norms = np.sqrt((points**2).sum(axis=1, keepdims=True))
    brier_tab = np.stack(
        [((points - np.eye(3)[i]) ** 2).sum(axis=1) for i in range(3)], axis=1
    )
    return {"brier": brier_tab, "log": log, "spherical": -points / norms}


def expected_scores(q: np.ndarray, table: np.ndarray) -> np.ndarray:
    """E_Q[S(X, P)] для всех пар (Q, P); 0 * inf считается нулём."""
    out = np.zeros((q.shape[0], table.shape[0]))
    for i in range(3):
        qi = q[:, i : i + 1]
        with np.errstate(invalid="ignore"):
            out += np.where(qi > 0.0, qi * table[None, :, i], 0.0)
    return out


def check_propriety(rng: np.random.Generator) -> tuple[bool, str]:
    grid = simplex_grid(0.05)
    bad = []
    for name, table in rule_table(grid).items():
        best = np.argmin(expected_scores(grid, table), axis=1)
        misses = int(np.sum(best != np.arange(grid.shape[0])))
        if misses:
            bad.append(f"{name}:{misses}")
    return not bad, f"{grid.shape[0]} grid points, misses: {','.join(bad) or 'none'}"


def check_conjugacy(rng: np.random.Generator) -> tuple[bool, str]:
    for _ in range(10_000):
        # двоичные дроби: сложение точное
        a = rng.integers(1, 160, 3) / 8.0
        c1 = CountVector(**dict(zip(("wins", "draws", "losses"), rng.integers(0, 40, 3).tolist())))
        c2 = CountVector(**dict(zip(("wins", "draws", "losses"), rng.integers(0, 40, 3).tolist())))
        prior = DirichletParams(a1=a[0], a2=a[1], a3=a[2])
        if posterior(posterior(prior, c1), c2) != posterior(prior, c1 + c2):
            return False, f"mismatch at prior={a.tolist()} c1={c1} c2={c2}"
    return True, "10000 random cases"


def check_davidson_recovery(rng: np.random.Generator) -> tuple[bool, str]:
    truth = BTParams.normalized({"a": 0.4, "b": 0.3, "c": 0.2, "d": 0.1}, gamma=1.5, nu=0.8)
    matches = simulate_davidson_matches(truth, 500, rng)
    fit = bt_fit(with_outcomes(matches))
    worth_err = max(abs(fit.params.worth[t] - truth.worth[t]) for t in truth.worth)
    gamma_err = abs(fit.params.gamma - truth.gamma)
    nu_err = abs(fit.params.nu - truth.nu)
    ok = worth_err <= 0.05 and gamma_err <= 0.1 and nu_err <= 0.1
    return ok, f"worth_err={worth_err:.4f} gamma={fit.params.gamma:.4f} nu={fit.params.nu:.4f}"


def check_davidson_gradient(rng: np.random.Generator) -> tuple[bool, str]:
    truth = BTParams.normalized({"a": 0.4, "b": 0.3, "c": 0.2, "d": 0.1}, gamma=1.5, nu=0.8)
    lik = DavidsonLikelihood(with_outcomes(simulate_davidson_matches(truth, 20, rng)))
    worst = 0.0
    h = 1e-6
    for _ in range(100):
        theta = rng.normal(0.0, 1.0, lik.n_params)
        _, grad = lik(theta)
        for i in range(lik.n_params):
            up, down = theta.copy(), theta.copy()
            up[i] += h
            down[i] -= h
            numeric = (lik(up)[0] - lik(down)[0]) / (2 * h)
            worst = max(worst, abs(numeric - grad[i]) / max(1.0, abs(numeric)))
    return worst <= 1e-5, f"max relative error {worst:.2e}"


def check_bivariate_poisson(rng: np.random.Generator) -> tuple[bool, str]:
    p = BivPoissonParams(lambda1=1.3, lambda2=0.9, lambda3=0.0)
    worst = 0.0
    for y1 in range(16):
        for y2 in range(16):
            direct = poisson.pmf(y1, p.lambda1) * poisson.pmf(y2, p.lambda2)
            worst = max(worst, abs(bivpois_pmf(p, y1, y2) - direct) / direct)
    tol = 1e-10
    grid = score_grid(BivPoissonParams(lambda1=1.3, lambda2=0.9, lambda3=0.3), tol)
    draws = sample_bivpois(BivPoissonParams(lambda1=1.0, lambda2=1.0, lambda3=0.3), 1_000_000, rng)
    z = (draws[:, 0] - draws[:, 0].mean()) * (draws[:, 1] - draws[:, 1].mean())
    cov, se = float(z.mean()), float(z.std() / math.sqrt(z.size))
    ok = worst <= 1e-12 and grid.total >= 1.0 - tol and abs(cov - 0.3) <= 3 * se
    return ok, f"pmf_rel_err={worst:.1e} grid_total={grid.total:.12f} cov={cov:.4f}±{se:.4f}"


def check_poisson_recovery(rng: np.random.Generator) -> tuple[bool, str]:
    truth = TeamStrengths(
        mu=0.1,
        att={"a": 0.3, "b": 0.1, "c": -0.1, "d": -0.3},
        defence={"a": 0.2, "b": 0.1, "c": -0.1, "d": -0.2},
        gamma_home=0.25,
    )
    fit = poisson_fit(simulate_poisson_matches(truth, 1000, rng), correlated=False)
    s = fit.strengths
    errs = [abs(s.mu - truth.mu), abs(s.gamma_home - truth.gamma_home)]
    errs += [abs(s.att[t] - truth.att[t]) for t in truth.att]
    errs += [abs(s.defence[t] - truth.defence[t]) for t in truth.defence]
    zero_sum = max(abs(sum(s.att.values())), abs(sum(s.defence.values())))
    ok = max(errs) <= 0.05 and zero_sum <= 1e-9
    return ok, f"max_err={max(errs):.4f} zero_sum={zero_sum:.1e}"


def check_gof(rng: np.random.Generator) -> tuple[bool, str]:
    teams = [f"t{i:02d}" for i in range(20)]
    fixtures = double_round_robin(teams)
    # 19 домашних матчей по 1/19: ожидается ровно одна победа дома и одна в гостях
    exact = Prediction.from_weights(1 / 19, 1 - 2 / 19, 1 / 19)
    # туры 1 и 20 зеркальны: каждая команда ровно раз хозяин в одном из них, так же 2 и 21
    perfect = []
    for m in fixtures:
        outcome = Outcome.DRAW
        if m.matchday in (1, 20):
            outcome = Outcome.HOME_WIN
        elif m.matchday in (2, 21):
            outcome = Outcome.AWAY_WIN
        perfect.append((m, exact, outcome))
    g0 = chi_square_gof(perfect)
    # "хорошо заданный" прогноз с редкими победами: E[stat] = sum(1 - p) близко к df
    low = Prediction.from_weights(0.02, 0.96, 0.02)
    stats = []
    for _ in range(200):
        played = draw_outcomes(fixtures, lambda m: low, rng)
        rows = [(m, low, outcome_of(m)) for m in played]
        stats.append(chi_square_gof(rows).statistic)
    mean = float(np.mean(stats))
    ok = (
        g0.df == 40
        and abs(g0.statistic) <= 1e-12
        and abs(g0.p_value - 1.0) <= 1e-12
        and abs(mean - 40) <= 4.0
    )
    return ok, f"perfect stat={g0.statistic:.2e} p={g0.p_value:.6f} df={g0.df}; simulated mean={mean:.2f}"


def check_calibration(rng: np.random.Generator) -> tuple[bool, str]:
    n = 3000
    probs = rng.dirichlet((2.0, 1.5, 1.5), n)
    u = rng.random(n)
    idx = (u[:, None] > np.cumsum(probs, axis=1)[:, :2]).sum(axis=1)
    pairs = [(Outcome(int(i) + 1), Prediction.from_weights(*p)) for i, p in zip(idx, probs)]
    report = calibration_curve(pairs, grid_points=41, simultaneous=True)
    frac = report.smoothed.fraction_inside_band
    return frac >= 0.95, f"{frac:.1%} of 41 grid points inside the band (h={report.smoothed.bandwidth:.3f})"


def check_leakage(rng: np.random.Generator) -> tuple[bool, str]:
    truth = BTParams.normalized({"a": 0.4, "b": 0.3, "c": 0.2, "d": 0.1}, gamma=1.5, nu=0.8)
    season = simulate_davidson_season(truth, rng)
    for md in range(1, season.rounds + 1):
        view = SeasonView(season, md)
        if any(m.is_played for m in view.fixtures()):
            return False, f"matchday {md}: target result visible"
        if any(m.matchday >= md for m in view.played()):
            return False, f"matchday {md}: later result visible"
        if any(m.matchday > md for m in view.season.matches):
            return False, f"matchday {md}: future fixtures visible"
    return True, f"{season.rounds} matchdays checked"


def brute_force_select(season: Season, grid: GridSpec) -> MnDir2Config:
    half = season.first_half_rounds
    first = [m for m in season.matches if m.matchday <= half and m.is_played]
    scores = {}
    for w in grid.w_points:
        for alpha in grid.alpha_points:
            cfg = MnDir2Config(alpha=alpha, weights=PoolWeights(w_home=w))
            total = 0.0
            for m, outcome in with_outcomes(first):
                h = venue_counts(season, m.home, "home", m.matchday - 1)
                a = venue_counts(season, m.away, "away", m.matchday - 1)
                total += brier(outcome, mn_dir2_predict(h, a, cfg))
            scores[(alpha, w)] = total
    best = min(scores.values())
    alpha, w = min(k for k, v in scores.items() if v <= best + 1e-12 * max(1.0, best))
    return MnDir2Config(alpha=alpha, weights=PoolWeights(w_home=w))


def check_cv_select(rng: np.random.Generator) -> tuple[bool, str]:
    grid = GridSpec.equally_spaced()
    truth = BTParams.normalized({"a": 0.4, "b": 0.3, "c": 0.2, "d": 0.1}, gamma=1.5, nu=0.8)
    for k in range(20):
        season = simulate_davidson_season(truth, np.random.default_rng(rng.integers(2**32)))
        half = season.first_half_rounds
        first = with_outcomes(m for m in season.matches if m.matchday <= half)
        got = cv_select(first, grid)
        want = brute_force_select(season, grid)
        if (got.alpha, got.w) != (want.alpha, want.w):
            return False, f"run {k}: selected {got} but exhaustive search gives {want}"
    return True, "20 seeded seasons agree with exhaustive search"


def check_determinism(rng: np.random.Generator) -> tuple[bool, str]:
    truth = BTParams.normalized(
        {"a": 0.3, "b": 0.25, "c": 0.2, "d": 0.15, "e": 0.1}, gamma=1.4, nu=0.7
    )
    seed = int(rng.integers(2**32))
    seasons = [
        simulate_davidson_season(truth, np.random.default_rng(seed + k), 2000 + k) for k in range(2)
    ]
    settings = DirichletSettings(w_points=5, alpha_points=5)

    def run() -> tuple[str, str]:
        predictors = [TrivialPredictor(), MnDir1Predictor(), MnDir2Predictor(settings), DavidsonPredictor()]
        reports = evaluate(predictors, seasons, CalibrationSettings(min_pairs=10))
        return render_report_json(reports), scores_frame(reports).to_csv(index=False)

    first, second = run(), run()
    return first == second, f"{len(first[0])} bytes of JSON, {len(first[1])} bytes of CSV"


CHECKS: dict[str, Check] = {
    "worked-example": check_worked_example,
    "scoring-golden": check_scoring_golden,
    "propriety": check_propriety,
    "conjugacy": check_conjugacy,
    "davidson-recovery": check_davidson_recovery,
    "davidson-gradient": check_davidson_gradient,
    "bivariate-poisson": check_bivariate_poisson,
    "poisson-recovery": check_poisson_recovery,
    "gof": check_gof,
    "calibration": check_calibration,
    "leakage": check_leakage,
    "cv-select": check_cv_select,
    "determinism": check_determinism,
}


def run_selftest(seed: int, only: list[str] | None = None) -> list[CheckResult]:
    """Каждая проверка получает свой поток из seed; упавшая с исключением считается проваленной."""
    names = only or list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}")
    # у каждой проверки свой поток случайных чисел от общего seed
    streams = np.random.SeedSequence(seed).spawn(len(CHECKS))
    rngs = {name: np.random.default_rng(s) for name, s in zip(CHECKS, streams)}
    results = []
    for name in names:
        started = time.perf_counter()
        try:
            passed, detail = CHECKS[name](rngs[name])
        except Exception as e:  # noqa: BLE001
            logger.exception("check %s crashed", name)
            passed, detail = False, f"{type(e).__name__}: {e}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - started))
    return results
