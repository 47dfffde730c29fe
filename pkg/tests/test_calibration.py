import numpy as np
import pytest

from matchcast.core.errors import InsufficientDataError
from matchcast.evaluation.calibration import (
    BANDWIDTHS,
    binned_calibration,
    calibration_curve,
    loo_error,
    select_bandwidth,
    smoothed_calibration,
    unroll,
)
from matchcast.schemas.match import Outcome, Prediction


def calibrated_pairs(rng, n):
    probs = rng.dirichlet((2.0, 1.5, 1.5), n)
    u = rng.random(n)
    idx = (u[:, None] > np.cumsum(probs, axis=1)[:, :2]).sum(axis=1)
    return [(Outcome(int(i) + 1), Prediction.from_weights(*p)) for i, p in zip(idx, probs)]


def test_unroll_gives_three_pairs_per_prediction():
    x, y = unroll([(Outcome.DRAW, Prediction(p1=0.5, p2=0.3, p3=0.2))])
    np.testing.assert_allclose(x, [0.5, 0.3, 0.2])
    np.testing.assert_array_equal(y, [0.0, 1.0, 0.0])


def test_binned_points_average_their_members():
    x = np.array([0.05, 0.15, 0.12, 0.95])
    y = np.array([0.0, 1.0, 0.0, 1.0])
    table = binned_calibration(x, y, bins=10)
    assert [round(p.prob, 6) for p in table.points] == [0.05, 0.135, 0.95]
    assert [p.observed for p in table.points] == [0.0, 0.5, 1.0]
    assert table.points[1].n_eff == pytest.approx(2.0)


def test_band_is_exact_null_spread():
    x = np.full(100, 0.3)
    y = np.zeros(100)
    [point] = binned_calibration(x, y, bins=5).points
    half = 1.959963984540054 * np.sqrt(0.3 * 0.7 / 100)
    assert point.band_lower == pytest.approx(0.3 - half)
    assert point.band_upper == pytest.approx(0.3 + half)
    assert not point.inside_band


def test_simultaneous_band_is_wider(rng):
    x, y = unroll(calibrated_pairs(rng, 300))
    pointwise = smoothed_calibration(x, y, bandwidth=0.05)
    joint = smoothed_calibration(x, y, bandwidth=0.05, simultaneous=True)
    for a, b in zip(pointwise.points, joint.points):
        assert b.band_upper - b.band_lower >= a.band_upper - a.band_lower


def test_grid_excludes_end_points():
    x = np.linspace(0.01, 0.99, 200)
    y = (np.arange(200) % 2).astype(float)
    table = smoothed_calibration(x, y, grid_points=9, bandwidth=0.1)
    np.testing.assert_allclose([p.prob for p in table.points], np.arange(1, 10) / 10)


def test_bandwidth_comes_from_candidates(rng):
    x, y = unroll(calibrated_pairs(rng, 200))
    h = select_bandwidth(x, y)
    assert h in BANDWIDTHS
    assert loo_error(x, y, h) <= loo_error(x, y, float(BANDWIDTHS[0]))


def test_loo_error_matches_naive_computation(rng):
    x = rng.random(40).round(2)
    y = (rng.random(40) < x).astype(float)
    h = 0.1
    naive = 0.0
    for i in range(x.size):
        w = np.exp(-0.5 * ((x[i] - x) / h) ** 2)
        w[i] = 0.0
        naive += (y[i] - (w @ y) / w.sum()) ** 2
    assert loo_error(x, y, h) == pytest.approx(naive)


@pytest.mark.slow
def test_calibrated_forecasts_stay_inside_the_band(rng):
    report = calibration_curve(calibrated_pairs(rng, 3000), grid_points=41, simultaneous=True)
    assert report.n_pairs == 9000
    assert report.smoothed.fraction_inside_band >= 0.95


def test_miscalibrated_forecasts_leave_the_band(rng):
    # исходы разыгрываются из равномерного прогноза, а заявляется смещённый
    n = 2000
    pairs = []
    for i in rng.integers(0, 3, n):
        pairs.append((Outcome(int(i) + 1), Prediction(p1=0.7, p2=0.2, p3=0.1)))
    report = calibration_curve(pairs, bandwidth=0.05)
    assert report.binned.fraction_inside_band < 1.0


def test_too_few_pairs():
    with pytest.raises(InsufficientDataError):
        calibration_curve([(Outcome.DRAW, Prediction.trivial())] * 5, min_pairs=30)
