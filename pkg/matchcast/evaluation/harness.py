from __future__ import annotations

import itertools
import logging
import math
from typing import Sequence

import numpy as np
from pydantic import ValidationError

from matchcast.core.audit import FlagTrail, log_action
from matchcast.core.config import CalibrationSettings
from matchcast.core.errors import InsufficientDataError, MatchcastError, NoResultError
from matchcast.data.counts import outcome_of, second_half_matchdays
from matchcast.evaluation.calibration import calibration_curve
from matchcast.evaluation.gof import chi_square_gof, pooled_gof
from matchcast.evaluation.predictors import MnDir2Predictor, Predictor, SeasonView
from matchcast.evaluation.scoring import LN3, proportion_of_errors, score_match, top_choices
from matchcast.schemas.match import Prediction, Season
from matchcast.schemas.reports import (
    DistributionSummary,
    GofResult,
    ModelReport,
    PairwiseComparison,
    ScoredMatch,
    ScoreSummary,
    SeasonBreakdown,
)

logger = logging.getLogger(__name__)

TRIVIAL_SCORES = {
    "brier": 2.0 / 3.0,
    "log": LN3,
    "spherical": -1.0 / math.sqrt(3.0),
}

Z95 = 1.959963984540054


# ---------- AGGREGATES ----------
def summarize_scores(values: Sequence[float], trivial: float) -> ScoreSummary:
    """Среднее, сумма и SE = выборочное SD / sqrt(n) по конечным значениям."""
    arr = np.asarray(values, dtype=float)
    finite = arr[np.isfinite(arr)]
    n_f = int(finite.size)
    if n_f == 0:
        nan = float("nan")
        return ScoreSummary(
            n=int(arr.size), n_finite=0, mean=nan, total=nan, se=nan, total_se=nan,
            ci_low=nan, ci_high=nan, trivial=trivial, excludes_trivial=False,
        )
    mean = float(finite.mean())
    se = float(finite.std(ddof=1) / math.sqrt(n_f)) if n_f > 1 else 0.0
    low, high = mean - Z95 * se, mean + Z95 * se
    return ScoreSummary(
        n=int(arr.size),
        n_finite=n_f,
        mean=mean,
        total=float(finite.sum()),
        se=se,
        total_se=se * n_f,
        ci_low=low,
        ci_high=high,
        trivial=trivial,
        excludes_trivial=not (low <= trivial <= high),
    )


def describe_distribution(values: Sequence[float]) -> DistributionSummary | None:
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if arr.size == 0:
        return None
    q1, median, q3 = np.percentile(arr, [25, 50, 75])
    return DistributionSummary(
        n=int(arr.size),
        mean=float(arr.mean()),
        min=float(arr.min()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        max=float(arr.max()),
    )


def _breakdown(season: int, scored: list[ScoredMatch], gof: GofResult | None) -> SeasonBreakdown:
    return SeasonBreakdown(
        season=season,
        n=len(scored),
        brier=summarize_scores([s.brier for s in scored], TRIVIAL_SCORES["brier"]),
        log=summarize_scores([s.log for s in scored], TRIVIAL_SCORES["log"]),
        spherical=summarize_scores([s.spherical for s in scored], TRIVIAL_SCORES["spherical"]),
        proportion_of_errors=(
            sum(s.top_choice_error for s in scored) / len(scored) if scored else float("nan")
        ),
        gof=gof,
    )


# ---------- ROLLING LOOP ----------
def check_second_half_played(season: Season) -> None:
    for md in second_half_matchdays(season):
        for m in season.fixtures(md):
            if not m.is_played:
                raise NoResultError(
                    f"season {season.year}: second-half match {m.matchday}:{m.home}-{m.away} has no result"
                )


def _score_season(
    predictor: Predictor,
    season: Season,
    history: Sequence[Season],
    trail: FlagTrail,
) -> list[ScoredMatch]:
    scored: list[ScoredMatch] = []
    for md in second_half_matchdays(season):
        view = SeasonView(season, md, history)
        try:
            preds = predictor.predict(view, trail)
        except (MatchcastError, ValidationError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            log_action(
                trail,
                action="PREDICTOR_FAILED",
                entity=f"{predictor.name}:{season.year}:{md}",
                details=str(e),
            )
            continue
        for m in season.fixtures(md):
            p = preds.get(m.key)
            if p is None:
                if not predictor.name.startswith("external:"):
                    log_action(
                        trail,
                        action="PREDICTION_ABSENT",
                        entity=predictor.name,
                        details=f"{m.season}:{m.matchday}:{m.home}-{m.away}",
                    )
                continue
            if not isinstance(p, Prediction):
                p = Prediction.model_validate(p)
            scored.append(score_match(m, p, outcome_of(m)))
    return scored


def evaluate_predictor(
    predictor: Predictor,
    seasons: Sequence[Season],
    calibration: CalibrationSettings | None = None,
) -> ModelReport:
    calibration = calibration or CalibrationSettings()
    trail = FlagTrail()
    ordered = sorted(seasons, key=lambda s: s.year)
    per_match: list[ScoredMatch] = []
    per_season: list[SeasonBreakdown] = []
    gofs: dict[int, GofResult] = {}

    for i, season in enumerate(ordered):
        scored = _score_season(predictor, season, ordered[:i], trail)
        gof = None
        if scored:
            gof = chi_square_gof(((s.match, s.prediction, s.outcome) for s in scored), trail)
            gofs[season.year] = gof
        per_season.append(_breakdown(season.year, scored, gof))
        per_match.extend(scored)

    n_inf = sum(1 for s in per_match if not math.isfinite(s.log))
    if n_inf:
        log_action(trail, action="INFINITE_LOG_SCORE", entity=predictor.name, details=f"{n_inf} matches")

    pairs = [(s.outcome, s.prediction) for s in per_match]
    errors = proportion_of_errors(pairs, trail) if pairs else float("nan")

    cal = None
    if pairs:
        try:
            cal = calibration_curve(
                pairs,
                bins=calibration.bins,
                grid_points=calibration.grid_points,
                level=calibration.level,
                min_pairs=calibration.min_pairs,
            )
        except InsufficientDataError as e:
            log_action(trail, action="CALIBRATION_SKIPPED", entity=predictor.name, details=str(e))

    selected = predictor.selected if isinstance(predictor, MnDir2Predictor) else []
    return ModelReport(
        model=predictor.name,
        per_match=per_match,
        brier=summarize_scores([s.brier for s in per_match], TRIVIAL_SCORES["brier"]),
        log=summarize_scores([s.log for s in per_match], TRIVIAL_SCORES["log"]),
        spherical=summarize_scores([s.spherical for s in per_match], TRIVIAL_SCORES["spherical"]),
        proportion_of_errors=errors,
        n_argmax_ties=sum(s.argmax_tie for s in per_match),
        n_infinite_log=n_inf,
        entropy=describe_distribution([s.entropy for s in per_match]),
        cond_home_win=describe_distribution([s.cond_home_win for s in per_match]),
        calibration=cal,
        gof=pooled_gof(gofs) if gofs else None,
        per_season=per_season,
        selected=selected,
        flags=trail.flags,
    )


def evaluate(
    predictors: Sequence[Predictor],
    seasons: Sequence[Season],
    calibration: CalibrationSettings | None = None,
) -> list[ModelReport]:
    """Отчёт на каждый предиктор, в порядке переданного списка."""
    for season in seasons:
        check_second_half_played(season)
    reports = []
    for predictor in predictors:
        logger.info("evaluating %s on %d season(s)", predictor.name, len(seasons))
        reports.append(evaluate_predictor(predictor, seasons, calibration))
    return reports


# ---------- MODEL AGREEMENT ----------
def comparison_rows(a: ModelReport, b: ModelReport) -> list[dict]:
    """Пары баллов по общим матчам двух моделей (для диаграмм рассеяния)."""
    other = {s.match.key: s for s in b.per_match}
    rows = []
    for sa in a.per_match:
        sb = other.get(sa.match.key)
        if sb is None:
            continue
        m = sa.match
        rows.append({
            "model_a": a.model,
            "model_b": b.model,
            "season": m.season,
            "matchday": m.matchday,
            "home": m.home,
            "away": m.away,
            "brier_a": sa.brier,
            "brier_b": sb.brier,
            "log_a": sa.log,
            "log_b": sb.log,
            "spherical_a": sa.spherical,
            "spherical_b": sb.spherical,
            "same_top_choice": set(top_choices(sa.prediction)) == set(top_choices(sb.prediction)),
        })
    return rows


def _mean_diff(rows: list[dict], rule: str) -> float:
    diffs = [r[f"{rule}_a"] - r[f"{rule}_b"] for r in rows]
    finite = [d for d in diffs if math.isfinite(d)]
    return float(np.mean(finite)) if finite else float("nan")


def pairwise_agreement(reports: Sequence[ModelReport]) -> list[PairwiseComparison]:
    out = []
    for a, b in itertools.combinations(reports, 2):
        rows = comparison_rows(a, b)
        out.append(
            PairwiseComparison(
                model_a=a.model,
                model_b=b.model,
                n=len(rows),
                agreement=(
                    sum(r["same_top_choice"] for r in rows) / len(rows) if rows else float("nan")
                ),
                mean_brier_diff=_mean_diff(rows, "brier"),
                mean_log_diff=_mean_diff(rows, "log"),
                mean_spherical_diff=_mean_diff(rows, "spherical"),
            )
        )
    return out
