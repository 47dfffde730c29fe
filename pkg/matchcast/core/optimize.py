from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

logger = logging.getLogger(__name__)

ObjectiveWithGradient = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass(frozen=True)
class OptimizerOutcome:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool
    gradient_norm: float
    at_bound: np.ndarray
    message: str


def projected_gradient_norm(x: np.ndarray, grad: np.ndarray, bound: float) -> float:
    """Max-норма градиента подъёма без компонент, упирающихся в активную границу."""
    g = np.array(grad, dtype=float)
    eps = 1e-10 * max(1.0, bound)
    g[(x >= bound - eps) & (g > 0)] = 0.0
    g[(x <= -bound + eps) & (g < 0)] = 0.0
    return float(np.max(np.abs(g))) if g.size else 0.0


def _newton_polish(
    fun: ObjectiveWithGradient,
    x: np.ndarray,
    free: np.ndarray,
    *,
    bound: float,
    tol: float,
    scale: float,
    max_steps: int = 8,
) -> np.ndarray:
    # шаги Ньютона по свободным координатам; гессиан из конечных разностей градиента
    idx = np.flatnonzero(free)
    x = x.copy()
    value, grad = fun(x)
    value, grad = value / scale, np.asarray(grad, dtype=float) / scale
    for _ in range(max_steps):
        if projected_gradient_norm(x, grad, bound) <= tol:
            break
        hess = np.empty((idx.size, idx.size))
        for col, i in enumerate(idx):
            h = 1e-5 * max(1.0, abs(x[i]))
            up, down = x.copy(), x.copy()
            up[i] += h
            down[i] -= h
            g_up = np.asarray(fun(up)[1], dtype=float)[idx] / scale
            g_down = np.asarray(fun(down)[1], dtype=float)[idx] / scale
            hess[:, col] = (g_up - g_down) / (2 * h)
        hess = 0.5 * (hess + hess.T)
        try:
            step = np.linalg.solve(hess, -grad[idx])
        except np.linalg.LinAlgError:
            break
        if float(step @ grad[idx]) <= 0.0:
            break
        candidate = x.copy()
        candidate[idx] = np.clip(x[idx] + step, -bound, bound)
        new_value, new_grad = fun(candidate)
        new_value, new_grad = new_value / scale, np.asarray(new_grad, dtype=float) / scale
        if not np.isfinite(new_value) or new_value < value - 1e-12 * max(1.0, abs(value)):
            break
        x, value, grad = candidate, new_value, new_grad
    return x


def maximize(
    fun: ObjectiveWithGradient,
    x0: np.ndarray,
    *,
    bound: float,
    tol: float,
    max_iter: int,
    scale: float = 1.0,
) -> OptimizerOutcome:
    """
    Максимизирует fun(x) / scale при |x_i| <= bound.

    fun возвращает (значение, градиент). Сходимость: проекция градиента
    (на масштабе 1/scale) не больше tol.
    """
    scale = float(max(scale, 1.0))

    def negated(x: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = fun(x)
        return -value / scale, -np.asarray(grad, dtype=float) / scale

    x0 = np.clip(np.asarray(x0, dtype=float), -bound, bound)
    if x0.size == 0:
        value, _ = fun(x0)
        return OptimizerOutcome(
            x=x0, value=float(value), iterations=0, converged=True,
            gradient_norm=0.0, at_bound=np.zeros(0, dtype=bool), message="no free parameters",
        )

    res = minimize(
        negated,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(-bound, bound)] * x0.size,
        options={"maxiter": max_iter, "gtol": tol, "ftol": 1e-15, "maxcor": 20},
    )
    x = np.asarray(res.x, dtype=float)
    eps = 1e-6 * bound
    at_bound = (x >= bound - eps) | (x <= -bound + eps)
    value, grad = fun(x)
    gnorm = projected_gradient_norm(x, np.asarray(grad) / scale, bound)
    if gnorm > tol and not at_bound.all():
        x = _newton_polish(fun, x, ~at_bound, bound=bound, tol=tol, scale=scale)
        value, grad = fun(x)
        gnorm = projected_gradient_norm(x, np.asarray(grad) / scale, bound)
    converged = bool(gnorm <= tol)
    if not converged:
        logger.info("optimizer stopped: %s (|g|=%.3g, tol=%.3g)", res.message, gnorm, tol)
    return OptimizerOutcome(
        x=x,
        value=float(value),
        iterations=int(res.nit),
        converged=converged,
        gradient_norm=gnorm,
        at_bound=at_bound,
        message=str(res.message),
    )
