from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from matchcast.core.audit import FlagTrail, log_action
from matchcast.core.errors import InsufficientDataError
from matchcast.schemas.match import MatchRecord, Outcome, Prediction
from matchcast.schemas.reports import ScoredMatch

LN3 = math.log(3.0)

# порог равенства вероятностей при поиске argmax
ARGMAX_TOL = 1e-12


def _indicator(outcome: Outcome) -> np.ndarray:
    e = np.zeros(3)
    e[outcome - 1] = 1.0
    return e


def brier(outcome: Outcome, p: Prediction) -> float:
    """Квадрат евклидова расстояния до вершины симплекса исхода."""
    return float(np.sum((np.asarray(p.as_tuple()) - _indicator(outcome)) ** 2))


def log_score(outcome: Outcome, p: Prediction) -> float:
    px = p.prob(outcome)
    if px <= 0.0:
        return math.inf
    return -math.log(px)


def spherical(outcome: Outcome, p: Prediction) -> float:
    norm = math.sqrt(sum(v * v for v in p.as_tuple()))
    return -p.prob(outcome) / norm


def top_choices(p: Prediction) -> list[Outcome]:
    values = p.as_tuple()
    top = max(values)
    return [Outcome(i + 1) for i, v in enumerate(values) if top - v <= ARGMAX_TOL]


def is_top_choice_error(outcome: Outcome, p: Prediction) -> bool:
    # при равенстве максимумов ошибки нет, если исход среди них
    return outcome not in top_choices(p)


def proportion_of_errors(
    scored: Iterable[tuple[Outcome, Prediction]],
    trail: FlagTrail | None = None,
) -> float:
    scored = list(scored)
    if not scored:
        raise InsufficientDataError("proportion of errors needs at least one prediction")
    errors = 0
    ties = 0
    for outcome, p in scored:
        errors += is_top_choice_error(outcome, p)
        ties += len(top_choices(p)) > 1
    if ties:
        log_action(trail, action="ARGMAX_TIES", details=f"{ties} predictions with tied maxima")
    return errors / len(scored)


def entropy(p: Prediction) -> float:
    return float(-sum(v * math.log(v) for v in p.as_tuple() if v > 0.0))


def cond_home_win_given_no_draw(p: Prediction) -> float | None:
    denom = p.p1 + p.p3
    if denom <= 0.0:
        return None
    return p.p1 / denom


def score_match(m: MatchRecord, p: Prediction, outcome: Outcome) -> ScoredMatch:
    return ScoredMatch(
        match=m,
        prediction=p,
        outcome=outcome,
        brier=brier(outcome, p),
        log=log_score(outcome, p),
        spherical=spherical(outcome, p),
        top_choice_error=int(is_top_choice_error(outcome, p)),
        argmax_tie=len(top_choices(p)) > 1,
        entropy=entropy(p),
        cond_home_win=cond_home_win_given_no_draw(p),
    )
