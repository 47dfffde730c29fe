from __future__ import annotations

import logging
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import norm

from matchcast.core.errors import InsufficientDataError
from matchcast.schemas.match import Outcome, Prediction
from matchcast.schemas.reports import CalibrationPoint, CalibrationReport, CalibrationTable

logger = logging.getLogger(__name__)

BANDWIDTHS = np.geomspace(0.01, 0.5, 24)
_CHUNK = 512


def unroll(scored: Iterable[tuple[Outcome, Prediction]]) -> tuple[np.ndarray, np.ndarray]:
    xs, ys = [], []
    for outcome, p in scored:
        for i, v in enumerate(p.as_tuple(), start=1):
            xs.append(v)
            ys.append(1.0 if outcome == i else 0.0)
    return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)


def _z(level: float, points: int, simultaneous: bool) -> float:
    alpha = 1.0 - level
    if simultaneous:
        # Бонферрони по всем точкам сетки
        alpha /= max(points, 1)
    return float(norm.ppf(1.0 - alpha / 2.0))


def _point(
    prob: float,
    weights: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    z_point: float,
    z_band: float,
) -> CalibrationPoint:
    sw = float(weights.sum())
    observed = float(weights @ y) / sw
    expected = float(weights @ x) / sw
    n_eff = sw * sw / float(weights @ weights)
    half = z_point * np.sqrt(observed * (1.0 - observed) / n_eff)
    # дисперсия оценки при y_j ~ Bernoulli(x_j)
    null_sd = np.sqrt(float((weights**2) @ (x * (1.0 - x)))) / sw
    return CalibrationPoint(
        prob=prob,
        observed=observed,
        expected=expected,
        n_eff=n_eff,
        lower=max(0.0, observed - half),
        upper=min(1.0, observed + half),
        band_lower=max(0.0, expected - z_band * null_sd),
        band_upper=min(1.0, expected + z_band * null_sd),
    )


def binned_calibration(
    x: np.ndarray,
    y: np.ndarray,
    *,
    bins: int = 10,
    level: float = 0.95,
    simultaneous: bool = False,
) -> CalibrationTable:
    edges = np.linspace(0.0, 1.0, bins + 1)
    idx = np.clip(np.digitize(x, edges[1:-1], right=False), 0, bins - 1)
    occupied = [b for b in range(bins) if np.any(idx == b)]
    z_point = _z(level, 1, False)
    z_band = _z(level, len(occupied), simultaneous)
    points = []
    for b in occupied:
        mask = idx == b
        w = mask.astype(float)
        points.append(_point(float(x[mask].mean()), w, x, y, z_point, z_band))
    return CalibrationTable(method="binned", level=level, simultaneous=simultaneous, points=points)


def _kernel(a: np.ndarray, b: np.ndarray, h: float) -> np.ndarray:
    return np.exp(-0.5 * ((a[:, None] - b[None, :]) / h) ** 2)


def loo_error(x: np.ndarray, y: np.ndarray, h: float) -> float:
    """Сумма квадратов ошибок leave-one-out для ядерного среднего с шириной h."""
    values, inverse = np.unique(x, return_inverse=True)
    counts = np.bincount(inverse).astype(float)
    ones = np.bincount(inverse, weights=y)
    fallback = float(y.mean())
    total = 0.0
    for start in range(0, values.size, _CHUNK):
        rows = slice(start, start + _CHUNK)
        k = _kernel(values[rows], values, h)
        a = k @ ones
        b = k @ counts - 1.0
        safe = b > 1e-12
        denom = np.where(safe, b, 1.0)
        est_one = np.where(safe, (a - 1.0) / denom, fallback)
        est_zero = np.where(safe, a / denom, fallback)
        c, s = counts[rows], ones[rows]
        total += float(np.sum(s * (1.0 - est_one) ** 2 + (c - s) * est_zero**2))
    return total


def select_bandwidth(x: np.ndarray, y: np.ndarray, candidates: Sequence[float] = BANDWIDTHS) -> float:
    errors = [loo_error(x, y, float(h)) for h in candidates]
    # np.argmin берёт первую (самую узкую) при равенстве
    return float(candidates[int(np.argmin(errors))])


def smoothed_calibration(
    x: np.ndarray,
    y: np.ndarray,
    *,
    grid_points: int = 19,
    level: float = 0.95,
    simultaneous: bool = False,
    bandwidth: float | None = None,
) -> CalibrationTable:
    h = bandwidth if bandwidth is not None else select_bandwidth(x, y)
    grid = np.linspace(1.0 / (grid_points + 1), grid_points / (grid_points + 1), grid_points)
    weights = _kernel(grid, x, h)
    z_point = _z(level, 1, False)
    z_band = _z(level, grid_points, simultaneous)
    points = []
    for g, w in zip(grid, weights):
        if w.sum() <= 1e-12:
            logger.info("calibration grid point %.3f has no data within reach, skipped", g)
            continue
        points.append(_point(float(g), w, x, y, z_point, z_band))
    return CalibrationTable(
        method="smoothed",
        level=level,
        simultaneous=simultaneous,
        bandwidth=h,
        points=points,
    )


def calibration_curve(
    scored: Iterable[tuple[Outcome, Prediction]],
    *,
    bins: int = 10,
    grid_points: int = 19,
    level: float = 0.95,
    simultaneous: bool = False,
    min_pairs: int = 30,
    bandwidth: float | None = None,
) -> CalibrationReport:
    """
    Каждый прогноз даёт три пары (p_i, 1{исход = i}).
    Две оценки P(событие | p): равные корзины и гауссово ядро с шириной по leave-one-out.
    Полоса вокруг точки: разброс оценки при идеально калиброванных прогнозах.
    """
    x, y = unroll(scored)
    if x.size < min_pairs:
        raise InsufficientDataError(f"calibration needs at least {min_pairs} pairs, got {x.size}")
    return CalibrationReport(
        n_pairs=int(x.size),
        binned=binned_calibration(x, y, bins=bins, level=level, simultaneous=simultaneous),
        smoothed=smoothed_calibration(
            x,
            y,
            grid_points=grid_points,
            level=level,
            simultaneous=simultaneous,
            bandwidth=bandwidth,
        ),
    )
