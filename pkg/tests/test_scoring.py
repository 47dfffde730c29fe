import math

import pytest

from matchcast.core.audit import FlagTrail
from matchcast.core.errors import InsufficientDataError
from matchcast.core.selftest import check_propriety
from matchcast.evaluation.scoring import (
    LN3,
    brier,
    cond_home_win_given_no_draw,
    entropy,
    is_top_choice_error,
    log_score,
    proportion_of_errors,
    score_match,
    spherical,
    top_choices,
)
from matchcast.schemas.match import Outcome, Prediction
from tests.helpers import played

P = Prediction(p1=0.25, p2=0.35, p3=0.40)
TRIVIAL = Prediction.trivial()


def test_golden_values():
    assert brier(Outcome.AWAY_WIN, P) == pytest.approx(0.545, abs=1e-12)
    assert log_score(Outcome.AWAY_WIN, P) == pytest.approx(-math.log(0.4), abs=1e-12)
    assert spherical(Outcome.AWAY_WIN, P) == pytest.approx(-0.4 / math.sqrt(0.345), abs=1e-12)


@pytest.mark.parametrize("outcome", list(Outcome))
def test_trivial_prediction_scores(outcome):
    assert brier(outcome, TRIVIAL) == pytest.approx(2 / 3, abs=1e-12)
    assert log_score(outcome, TRIVIAL) == pytest.approx(LN3, abs=1e-12)
    assert spherical(outcome, TRIVIAL) == pytest.approx(-1 / math.sqrt(3), abs=1e-12)


def test_certain_predictions():
    sure = Prediction(p1=1.0, p2=0.0, p3=0.0)
    assert brier(Outcome.HOME_WIN, sure) == 0.0
    assert brier(Outcome.AWAY_WIN, sure) == 2.0
    assert log_score(Outcome.HOME_WIN, sure) == 0.0
    assert log_score(Outcome.DRAW, sure) == math.inf
    assert spherical(Outcome.HOME_WIN, sure) == -1.0


def test_top_choices_and_errors():
    assert top_choices(P) == [Outcome.AWAY_WIN]
    assert top_choices(TRIVIAL) == list(Outcome)
    tied = Prediction(p1=0.4, p2=0.2, p3=0.4)
    assert not is_top_choice_error(Outcome.HOME_WIN, tied)
    assert is_top_choice_error(Outcome.DRAW, tied)


def test_proportion_of_errors_flags_ties():
    trail = FlagTrail()
    rows = [
        (Outcome.AWAY_WIN, P),
        (Outcome.HOME_WIN, P),
        (Outcome.DRAW, TRIVIAL),
        (Outcome.HOME_WIN, Prediction(p1=0.5, p2=0.2, p3=0.3)),
    ]
    assert proportion_of_errors(rows, trail) == pytest.approx(0.25)
    assert [f.action for f in trail] == ["ARGMAX_TIES"]
    with pytest.raises(InsufficientDataError):
        proportion_of_errors([])


def test_entropy_and_conditional_home_win():
    assert entropy(TRIVIAL) == pytest.approx(LN3)
    assert entropy(Prediction(p1=0.0, p2=1.0, p3=0.0)) == 0.0
    assert cond_home_win_given_no_draw(P) == pytest.approx(0.25 / 0.65)
    assert cond_home_win_given_no_draw(Prediction(p1=0.0, p2=1.0, p3=0.0)) is None
    assert entropy(Prediction(p1=0.5, p2=0.25, p3=0.25)) == pytest.approx(1.5 * math.log(2.0))


def test_score_match_collects_everything():
    s = score_match(played(2014, 20, "gremio", "atletico-pr", 0, 1), P, Outcome.AWAY_WIN)
    assert s.brier == pytest.approx(0.545)
    assert s.top_choice_error == 0
    assert not s.argmax_tie
    assert s.cond_home_win == pytest.approx(0.25 / 0.65)


def test_rules_are_strictly_proper(rng):
    passed, detail = check_propriety(rng)
    assert passed, detail
