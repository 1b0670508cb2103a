"""Minimize the CH detection-efficiency threshold over the analyzer angles.

A coarse grid over [0, pi)^4 supplies seeds; the best few are polished with a
Nelder-Mead simplex.  Angle sets that cannot violate at any eta <= 1 score
``inf`` so the simplex backs away from them.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .inequalities import min_efficiency_array

__all__ = ["ThresholdResult", "SweepRow", "minimize_threshold", "sweep_surface", "default_workers", "WORKERS_ENV"]

WORKERS_ENV = "EVENTREADY_THREADS"

# simplex settings: reflection 1, expansion 2, contraction 0.5, shrink 0.5
_NM_OPTIONS = {"xatol": 1e-10, "fatol": 1e-15, "maxiter": 500, "adaptive": False}


@dataclass(frozen=True)
class ThresholdResult:
    eta_min: Optional[float]
    angles: Optional[tuple[float, float, float, float]]  # (theta1, theta2, theta1p, theta2p), radians in [0, pi)
    converged: bool
    iterations: int


@dataclass(frozen=True)
class SweepRow:
    v: float
    rho: float  # R / (1 - R)
    R: float
    eta_min: Optional[float]
    angles: Optional[tuple[float, float, float, float]]


def _objective(rho, v):
    def f(x):
        return float(min_efficiency_array(x[0], x[1], x[2], x[3], rho, v))

    return f


def _grid_seeds(rho, v, points, n_seeds):
    g = np.linspace(0.0, np.pi, points, endpoint=False)
    a = np.meshgrid(g, g, g, g, indexing="ij", sparse=True)
    values = min_efficiency_array(a[0], a[1], a[2], a[3], rho, v).ravel()
    order = np.argsort(values, kind="stable")[:n_seeds]
    order = order[np.isfinite(values[order])]
    idx = np.unravel_index(order, (points,) * 4)
    return np.stack([g[i] for i in idx], axis=1), values[order]


def minimize_threshold(
    v: float,
    rho: float,
    *,
    grid_points: int = 24,
    n_seeds: int = 8,
    seed_order: Optional[Sequence[int]] = None,
) -> ThresholdResult:
    """Global minimum over the four analyzer angles of the efficiency threshold.

    ``seed_order`` permutes the refinement order of the grid seeds (the result
    should not depend on it).
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v!r}")
    if not rho > 0 or not math.isfinite(rho):
        raise ValueError(f"rho must be positive and finite, got {rho!r}")

    seeds, _ = _grid_seeds(rho, v, grid_points, n_seeds)
    if len(seeds) == 0:
        return ThresholdResult(None, None, False, 0)
    if seed_order is not None:
        seeds = seeds[list(seed_order)[: len(seeds)]]

    f = _objective(rho, v)
    best_x, best_f, iterations = None, math.inf, 0
    for x0 in seeds:
        res = minimize(f, x0, method="Nelder-Mead", options=_NM_OPTIONS)
        iterations += res.nit
        # strict improvement only: ties keep the earlier seed
        if res.fun < best_f:
            best_x, best_f = res.x, res.fun
    if not math.isfinite(best_f):
        return ThresholdResult(None, None, False, iterations)

    angles = tuple(float(a) % math.pi for a in best_x)
    # re-evaluate at the reported (wrapped) angles so the record is self-consistent
    eta = f(np.array(angles))
    return ThresholdResult(eta, angles, math.isfinite(eta), iterations)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer")
        return n
    return os.cpu_count() or 1


def _sweep_point(args) -> SweepRow:
    v, rho, kw = args
    R = rho / (1.0 + rho)
    # R/T of the lossless splitter and R/(1-R) are the same number
    assert abs(R / (1.0 - R) - rho) <= 1e-12 * max(1.0, rho)
    result = minimize_threshold(v, rho, **kw)
    return SweepRow(v=v, rho=rho, R=R, eta_min=result.eta_min, angles=result.angles)


def sweep_surface(
    v_grid: Sequence[float],
    rho_grid: Sequence[float],
    *,
    workers: Optional[int] = None,
    **minimize_kw,
) -> list[SweepRow]:
    """One row per (v, rho) grid point, v outer and rho inner.

    Points are independent; with ``workers > 1`` they run in a process pool
    and are returned in grid order regardless of completion order.
    """
    if len(v_grid) == 0 or len(rho_grid) == 0:
        raise ValueError("grids must be non-empty")
    tasks = [(float(v), float(rho), minimize_kw) for v in v_grid for rho in rho_grid]
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(tasks) == 1:
        return [_sweep_point(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(_sweep_point, tasks))
