import math

import numpy as np
import pytest

from matchcast.core.audit import FlagTrail
from matchcast.core.config import BTSettings
from matchcast.core.errors import FitError, InsufficientDataError, UnknownTeamError
from matchcast.data.counts import with_outcomes
from matchcast.data.synthetic import simulate_davidson_matches
from matchcast.engines.davidson import (
    DavidsonLikelihood,
    bt_fit,
    bt_log_likelihood,
    bt_outcome_probs,
    bt_rolling_fit,
    bt_rolling_predict,
    davidson_probs,
    export_bt_fit,
)
from matchcast.schemas.davidson import BTParams
from matchcast.schemas.match import Outcome
from tests.helpers import played


def test_davidson_probs_special_cases():
    assert davidson_probs(1.0, 1.0, 1.0, 0.0).as_tuple() == pytest.approx((0.5, 0.0, 0.5))
    assert davidson_probs(1.0, 1.0, 2.0, 0.0).as_tuple() == pytest.approx((2 / 3, 0.0, 1 / 3))
    assert davidson_probs(0.3, 0.3, 1.0, 1.0).as_tuple() == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    # масштаб сил не важен
    assert davidson_probs(2.0, 8.0, 1.3, 0.7).as_tuple() == pytest.approx(
        davidson_probs(0.2, 0.8, 1.3, 0.7).as_tuple()
    )
    with pytest.raises(ValueError):
        davidson_probs(0.0, 1.0, 1.0, 1.0)


def test_outcome_probs_use_normalized_names(bt_truth):
    p = bt_outcome_probs(bt_truth, " A ", "d")
    win, loss, draw = 1.5 * 0.4, 0.1, 0.8 * math.sqrt(0.04)
    total = win + loss + draw
    assert p.as_tuple() == pytest.approx((win / total, draw / total, loss / total))
    with pytest.raises(UnknownTeamError):
        bt_outcome_probs(bt_truth, "a", "zz")


def test_params_must_be_normalized():
    with pytest.raises(ValueError):
        BTParams(worth={"a": 0.5, "b": 0.6}, gamma=1.0, nu=1.0)
    with pytest.raises(ValueError):
        BTParams(worth={"a": 1.0, "b": 0.0}, gamma=1.0, nu=1.0)


def test_log_likelihood_flags_impossible_outcome():
    params = BTParams.normalized({"a": 1.0, "b": 1.0}, gamma=1.0, nu=0.0)
    trail = FlagTrail()
    ll = bt_log_likelihood(params, [(played(2014, 1, "a", "b", 1, 1), Outcome.DRAW)], trail)
    assert ll == -math.inf
    assert [f.action for f in trail] == ["ZERO_PROBABILITY_OUTCOME"]


def test_gradient_matches_finite_differences(rng, bt_truth):
    lik = DavidsonLikelihood(with_outcomes(simulate_davidson_matches(bt_truth, 5, rng)))
    h = 1e-6
    for _ in range(10):
        theta = rng.normal(0.0, 1.0, lik.n_params)
        _, grad = lik(theta)
        numeric = np.array([
            (lik(theta + h * e)[0] - lik(theta - h * e)[0]) / (2 * h)
            for e in np.eye(lik.n_params)
        ])
        np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-5)


def test_likelihood_agrees_with_direct_sum(rng, bt_truth):
    matches = with_outcomes(simulate_davidson_matches(bt_truth, 3, rng))
    lik = DavidsonLikelihood(matches)
    value, _ = lik(lik.from_params(bt_truth))
    assert value == pytest.approx(bt_log_likelihood(bt_truth, matches))


def test_from_params_round_trip(bt_truth):
    lik = DavidsonLikelihood([(played(2014, 1, "a", "b", 1, 0), Outcome.HOME_WIN)], teams=bt_truth.worth)
    back = lik.to_params(lik.from_params(bt_truth))
    for team, w in bt_truth.worth.items():
        assert back.worth[team] == pytest.approx(w)
    assert back.gamma == pytest.approx(bt_truth.gamma)
    assert back.nu == pytest.approx(bt_truth.nu)


@pytest.mark.slow
def test_fit_recovers_parameters(rng, bt_truth):
    fit = bt_fit(with_outcomes(simulate_davidson_matches(bt_truth, 500, rng)))
    assert fit.report.converged
    for team, w in bt_truth.worth.items():
        assert fit.params.worth[team] == pytest.approx(w, abs=0.05)
    assert fit.params.gamma == pytest.approx(1.5, abs=0.1)
    assert fit.params.nu == pytest.approx(0.8, abs=0.1)


def test_fit_is_deterministic(rng, bt_truth):
    matches = with_outcomes(simulate_davidson_matches(bt_truth, 10, rng))
    assert bt_fit(matches) == bt_fit(matches)


def test_fit_without_ties():
    matches = [
        (played(2014, 1, "a", "b", 1, 0), Outcome.HOME_WIN),
        (played(2014, 2, "b", "a", 1, 0), Outcome.HOME_WIN),
        (played(2014, 3, "a", "b", 0, 1), Outcome.AWAY_WIN),
        (played(2014, 4, "b", "a", 2, 0), Outcome.HOME_WIN),
    ]
    fit = bt_fit(matches, fit_ties=False)
    assert fit.params.nu == 0.0
    assert bt_outcome_probs(fit.params, "a", "b").p2 == 0.0
    with pytest.raises(FitError):
        bt_fit(matches + [(played(2014, 5, "a", "b", 1, 1), Outcome.DRAW)], fit_ties=False)


def test_no_draws_pushes_nu_to_the_boundary(rng, bt_truth):
    no_ties = BTParams(worth=bt_truth.worth, gamma=1.5, nu=0.0)
    matches = with_outcomes(simulate_davidson_matches(no_ties, 20, rng))
    assert all(o != Outcome.DRAW for _, o in matches)
    trail = FlagTrail()
    fit = bt_fit(matches, trail=trail)
    assert fit.report.boundary.nu
    assert not fit.report.boundary.gamma
    assert fit.params.nu < 1e-3
    assert "BOUNDARY_ESTIMATE" in [f.action for f in trail]


def test_one_sided_results_flag_gamma_and_teams():
    # дома всегда побеждают хозяева: gamma неограничена, силы при этом равны
    matches = [
        (played(2014, 1, "a", "b", 1, 0), Outcome.HOME_WIN),
        (played(2014, 2, "b", "a", 2, 1), Outcome.HOME_WIN),
    ]
    boundary = bt_fit(matches, fit_ties=False).report.boundary
    assert boundary.gamma and not boundary.nu
    assert boundary.teams == []

    # опорная команда "a" проиграла всё
    losing = [
        (played(2014, 1, "a", "b", 0, 1), Outcome.AWAY_WIN),
        (played(2014, 2, "b", "a", 1, 0), Outcome.HOME_WIN),
        (played(2014, 3, "b", "c", 1, 1), Outcome.DRAW),
        (played(2014, 4, "c", "b", 1, 0), Outcome.HOME_WIN),
        (played(2014, 5, "c", "a", 0, 0), Outcome.DRAW),
    ]
    flags = bt_fit(losing).report.boundary
    assert "a" not in flags.teams  # ничья с "c" держит силу конечной
    assert "a" in bt_fit(losing[:4]).report.boundary.teams


def test_balanced_data_gives_equal_worths():
    teams = ["a", "b", "c", "d"]
    goals = {Outcome.HOME_WIN: (1, 0), Outcome.DRAW: (1, 1), Outcome.AWAY_WIN: (0, 1)}
    matches = []
    day = 0
    for home in teams:
        for away in teams:
            if home == away:
                continue
            for o in (Outcome.HOME_WIN, Outcome.DRAW, Outcome.AWAY_WIN):
                day += 1
                matches.append((played(2014, day, home, away, *goals[o]), o))
    trail = FlagTrail()
    fit = bt_fit(matches, trail=trail)
    assert fit.report.converged
    assert fit.params.worth == pytest.approx({t: 0.25 for t in teams}, abs=1e-6)
    # p_draw = nu / (2 + nu) = 1/3
    assert fit.params.gamma == pytest.approx(1.0, abs=1e-6)
    assert fit.params.nu == pytest.approx(1.0, abs=1e-6)
    assert not fit.report.boundary.any
    assert list(trail) == []


def test_fit_does_not_lose_to_the_starting_point(rng, bt_truth):
    matches = with_outcomes(simulate_davidson_matches(bt_truth, 4, rng))
    lik = DavidsonLikelihood(matches)
    start, _ = lik(lik.initial())
    assert bt_fit(matches).report.log_likelihood >= start


@pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e4])
def test_scaling_worths_keeps_probabilities(rng, c):
    for _ in range(20):
        pi_h, pi_a, gamma, nu = rng.uniform(0.05, 3.0, 4)
        base = davidson_probs(pi_h, pi_a, gamma, nu).as_tuple()
        assert davidson_probs(c * pi_h, c * pi_a, gamma, nu).as_tuple() == pytest.approx(base, rel=1e-12)


def test_swapping_venues_without_home_advantage_mirrors(bt_truth):
    neutral = BTParams(worth=bt_truth.worth, gamma=1.0, nu=bt_truth.nu)
    for home, away in [("a", "b"), ("c", "d"), ("d", "a")]:
        p = bt_outcome_probs(neutral, home, away)
        q = bt_outcome_probs(neutral, away, home)
        assert q.as_tuple() == pytest.approx((p.p3, p.p2, p.p1))


def test_second_leg_is_predicted_differently(davidson_season):
    fit = bt_fit(with_outcomes(davidson_season.matches))
    first = bt_outcome_probs(fit.params, "a", "b")
    second = bt_outcome_probs(fit.params, "b", "a")
    assert first.as_tuple() != pytest.approx((second.p3, second.p2, second.p1))


def test_dominant_team_hits_the_bound():
    results = [
        ("z", "a", Outcome.HOME_WIN), ("a", "z", Outcome.AWAY_WIN),
        ("z", "b", Outcome.HOME_WIN), ("b", "z", Outcome.AWAY_WIN),
        ("a", "b", Outcome.HOME_WIN), ("b", "a", Outcome.DRAW),
        ("a", "b", Outcome.AWAY_WIN), ("b", "a", Outcome.HOME_WIN),
    ]
    goals = {Outcome.HOME_WIN: (1, 0), Outcome.DRAW: (0, 0), Outcome.AWAY_WIN: (0, 1)}
    matches = [(played(2014, i + 1, h, a, *goals[o]), o) for i, (h, a, o) in enumerate(results)]
    trail = FlagTrail()
    fit = bt_fit(matches, BTSettings(bound=3.0), trail=trail)
    assert "z" in fit.report.boundary.teams
    assert "BOUNDARY_ESTIMATE" in [f.action for f in trail]


def test_rolling_fit_uses_only_earlier_matchdays(davidson_season):
    with pytest.raises(InsufficientDataError):
        bt_rolling_fit(davidson_season, 1)
    fit = bt_rolling_fit(davidson_season, 4)
    assert fit.report.n_matches == len(davidson_season.played_before(4))
    assert set(fit.params.worth) == set(davidson_season.teams)
    preds = bt_rolling_predict(davidson_season, 4)
    assert set(preds) == {m.key for m in davidson_season.fixtures(4)}


def test_export_bt_fit(rng, bt_truth):
    fit = bt_fit(with_outcomes(simulate_davidson_matches(bt_truth, 5, rng)))
    lines = export_bt_fit(fit).splitlines()
    assert lines[0] == "team,worth"
    assert lines[-2] == "gamma,nu"
    rows = dict(line.split(",") for line in lines[1:-2])
    assert {t: float(v) for t, v in rows.items()} == fit.params.worth
    gamma, nu = map(float, lines[-1].split(","))
    assert (gamma, nu) == (fit.params.gamma, fit.params.nu)
