from collections import Counter

import numpy as np
import pytest

from matchcast.data.synthetic import (
    double_round_robin,
    sample_bivpois,
    simulate_davidson_season,
)
from matchcast.schemas.poisson import BivPoissonParams


@pytest.mark.parametrize("n_teams", [2, 4, 5, 20])
def test_double_round_robin_shape(n_teams):
    teams = [f"t{i}" for i in range(n_teams)]
    fixtures = double_round_robin(teams, 2000)
    pairs = Counter((m.home, m.away) for m in fixtures)
    assert len(fixtures) == n_teams * (n_teams - 1)
    assert set(pairs.values()) == {1}
    for day in {m.matchday for m in fixtures}:
        playing = [t for m in fixtures if m.matchday == day for t in (m.home, m.away)]
        assert len(playing) == len(set(playing))


def test_second_half_mirrors_first():
    fixtures = double_round_robin(["a", "b", "c", "d"])
    rounds = max(m.matchday for m in fixtures) // 2
    first = {(m.matchday, m.home, m.away) for m in fixtures if m.matchday <= rounds}
    second = {(m.matchday - rounds, m.away, m.home) for m in fixtures if m.matchday > rounds}
    assert first == second


def test_double_round_robin_rejects_bad_teams():
    with pytest.raises(ValueError):
        double_round_robin(["a"])
    with pytest.raises(ValueError):
        double_round_robin(["a", "b", "a"])


def test_simulation_is_seeded(bt_truth):
    one = simulate_davidson_season(bt_truth, np.random.default_rng(3))
    two = simulate_davidson_season(bt_truth, np.random.default_rng(3))
    assert one == two
    assert all(m.is_played for m in one.matches)


@pytest.mark.parametrize("lambda3", [0.0, 0.4])
def test_bivariate_sampler_moments(lambda3):
    p = BivPoissonParams(lambda1=1.2, lambda2=0.8, lambda3=lambda3)
    draws = sample_bivpois(p, 200_000, np.random.default_rng(5))
    np.testing.assert_allclose(draws.mean(axis=0), [1.2 + lambda3, 0.8 + lambda3], atol=0.02)
    assert np.cov(draws.T)[0, 1] == pytest.approx(lambda3, abs=0.02)
