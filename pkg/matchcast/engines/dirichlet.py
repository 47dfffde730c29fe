from __future__ import annotations

import logging
from itertools import groupby
from typing import Iterable, Sequence

import numpy as np

from matchcast.core.errors import InsufficientDataError
from matchcast.data.counts import tally
from matchcast.schemas.dirichlet import DirichletParams, GridSpec, MnDir2Config, PoolWeights
from matchcast.schemas.match import CountVector, MatchRecord, Outcome, Prediction, Venue

logger = logging.getLogger(__name__)

UNIFORM_PRIOR = DirichletParams.symmetric(1.0)

DEFAULT_MN_DIR2 = MnDir2Config(alpha=1.0, weights=PoolWeights(w_home=0.5))

# относительный допуск при сравнении сумм Брайера на сетке
_TIE_RTOL = 1e-12


def posterior(prior: DirichletParams, counts: CountVector) -> DirichletParams:
    return DirichletParams(
        a1=prior.a1 + counts.wins,
        a2=prior.a2 + counts.draws,
        a3=prior.a3 + counts.losses,
    )


def predictive(post: DirichletParams) -> Prediction:
    """Среднее апостериорного Дирихле: p_i = a_i / a_dot."""
    return Prediction.from_weights(*post.as_tuple())


def pool(home_view: Prediction, away_view: Prediction, weights: PoolWeights) -> Prediction:
    """
    Линейный пул двух "наблюдателей". away_view задан с точки зрения гостей,
    поэтому его победа и поражение меняются местами.
    """
    w = weights.w_home
    return Prediction.from_weights(
        w * home_view.p1 + (1.0 - w) * away_view.p3,
        w * home_view.p2 + (1.0 - w) * away_view.p2,
        w * home_view.p3 + (1.0 - w) * away_view.p1,
    )


def mn_dir1_predict(
    h: CountVector,
    a: CountVector,
    prior: DirichletParams = UNIFORM_PRIOR,
) -> Prediction:
    return pool(
        predictive(posterior(prior, h)),
        predictive(posterior(prior, a)),
        PoolWeights(w_home=0.5),
    )


def mn_dir2_predict(h: CountVector, a: CountVector, cfg: MnDir2Config) -> Prediction:
    prior = DirichletParams.symmetric(cfg.alpha)
    return pool(predictive(posterior(prior, h)), predictive(posterior(prior, a)), cfg.weights)


def predict_fixtures(
    history: Iterable[MatchRecord],
    fixtures: Iterable[MatchRecord],
    cfg: MnDir2Config = DEFAULT_MN_DIR2,
) -> dict[tuple[int, int, str, str], Prediction]:
    """
    Прогноз тура по всем сыгранным матчам сезона до него.
    Перенос апостериорного как априорного между турами равносилен сложению счётчиков.
    """
    counts = tally(history)
    out = {}
    for m in fixtures:
        h = counts.get((m.home, Venue.home), CountVector())
        a = counts.get((m.away, Venue.away), CountVector())
        out[m.key] = mn_dir2_predict(h, a, cfg)
    return out


# ---------- CROSS-VALIDATION ----------
def _prequential_counts(
    first_half: Sequence[tuple[MatchRecord, Outcome]],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Счётчики хозяев/гостей до тура каждого матча (внутри тура друг друга не видят)."""
    ordered = sorted(first_half, key=lambda mo: mo[0].matchday)
    hs, as_, ys = [], [], []
    seen: list[MatchRecord] = []
    for _, group in groupby(ordered, key=lambda mo: mo[0].matchday):
        group = list(group)
        counts = tally(seen)
        for m, outcome in group:
            hs.append(counts.get((m.home, Venue.home), CountVector()).as_tuple())
            as_.append(counts.get((m.away, Venue.away), CountVector()).as_tuple())
            ys.append(int(outcome) - 1)
        seen.extend(m for m, _ in group)
    return np.asarray(hs, dtype=float), np.asarray(as_, dtype=float), np.asarray(ys, dtype=int)


def brier_surface(
    first_half: Sequence[tuple[MatchRecord, Outcome]],
    grid: GridSpec,
) -> np.ndarray:
    """Суммарный Брайер первой половины, shape (len(w_points), len(alpha_points))."""
    h, a, y = _prequential_counts(first_half)
    w = np.asarray(grid.w_points, dtype=float)[:, None, None, None]
    alpha = np.asarray(grid.alpha_points, dtype=float)[:, None, None]

    ph = (h[None] + alpha) / (h.sum(axis=1)[None, :, None] + 3.0 * alpha)
    pa = (a[None] + alpha) / (a.sum(axis=1)[None, :, None] + 3.0 * alpha)
    pa_swapped = pa[..., ::-1]
    p = w * ph[None] + (1.0 - w) * pa_swapped[None]

    target = np.zeros((y.size, 3))
    target[np.arange(y.size), y] = 1.0
    return ((p - target) ** 2).sum(axis=(2, 3))


def cv_select(
    first_half: Sequence[tuple[MatchRecord, Outcome]],
    grid: GridSpec,
) -> MnDir2Config:
    """
    (w, alpha) с минимальной суммой Брайера первой половины.
    При равенстве: меньшее alpha, затем меньшее w.
    """
    if not grid.w_points or not grid.alpha_points:
        raise ValueError("grid must not be empty")
    if not first_half:
        raise InsufficientDataError("cross-validation needs at least one first-half match")

    scores = brier_surface(first_half, grid)
    best = float(scores.min())
    limit = best + _TIE_RTOL * max(1.0, abs(best))
    candidates = sorted(
        (alpha, w)
        for i, w in enumerate(grid.w_points)
        for j, alpha in enumerate(grid.alpha_points)
        if scores[i, j] <= limit
    )
    alpha, w = candidates[0]
    logger.info("cv_select: w=%.6f alpha=%.6f brier=%.6f (%d ties)", w, alpha, best, len(candidates) - 1)
    return MnDir2Config(alpha=alpha, weights=PoolWeights(w_home=w))
