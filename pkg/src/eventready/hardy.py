"""Hardy-type nonlocality conditions on the preselected Bell pair.

With D1 set to theta1 or theta1', D2 to theta2 or theta2', the conditions are

    P(theta1, theta2') / P(theta1) = 1      (theta1 always comes with theta2')
    P(theta1', theta2) / P(theta2) = 1      (theta2 always comes with theta1')
    P(theta1', theta2') = 0
    P(theta1, theta2) > 0

Each equality is accepted within a tolerance ``eps``.  Because tolerances let
a local model reach P(theta1, theta2) of order ``eps``, a setting is only
classified as violating when P(theta1, theta2) also exceeds the local bound

    P(theta1', theta2') + P(theta1) (1 - r1) + P(theta2) (1 - r2)

that any local model obeys at the same constraint residuals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .core_model import bell_pair_p, singles_p_d1, singles_p_d2

__all__ = [
    "HardySettings",
    "HardyReport",
    "hardy_check",
    "hardy_search",
    "hardy_visibility_threshold",
    "DEFAULT_EPS",
]

DEFAULT_EPS = 1e-6
# local-bound margins below this are treated as rounding noise
_MARGIN_FLOOR = 1e-12


@dataclass(frozen=True)
class HardySettings:
    theta1: float
    theta1p: float
    theta2: float
    theta2p: float
    R: float
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 0.0 < self.R < 1.0:
            raise ValueError(f"reflectivity must lie in (0, 1), got {self.R!r}")

    @property
    def rho(self) -> float:
        return self.R / (1.0 - self.R)

    @property
    def angles(self) -> tuple[float, float, float, float]:
        return self.theta1, self.theta1p, self.theta2, self.theta2p


@dataclass(frozen=True)
class HardyReport:
    ratio1: Optional[float]  # P(theta1, theta2') / P(theta1); None if P(theta1) = 0
    ratio2: Optional[float]  # P(theta1', theta2) / P(theta2)
    p_positive: float  # P(theta1, theta2)
    p_zero: float  # P(theta1', theta2')
    margin: float  # p_positive minus the local bound
    violating: bool

    @property
    def residual1(self) -> Optional[float]:
        return None if self.ratio1 is None else abs(self.ratio1 - 1)

    @property
    def residual2(self) -> Optional[float]:
        return None if self.ratio2 is None else abs(self.ratio2 - 1)


def _hardy_terms(x, rho, v):
    """(P(t1,t2), 1 - r1, 1 - r2, P(t1',t2'), margin) for x = (t1, t1', t2, t2')."""
    t1, t1p, t2, t2p = x
    single1 = singles_p_d1(t1, rho)
    single2 = singles_p_d2(t2, rho)
    miss1 = 1.0 - bell_pair_p(t1, t2p, rho, v) / single1
    miss2 = 1.0 - bell_pair_p(t1p, t2, rho, v) / single2
    p_zero = bell_pair_p(t1p, t2p, rho, v)
    p_pos = bell_pair_p(t1, t2, rho, v)
    margin = p_pos - p_zero - single1 * miss1 - single2 * miss2
    return p_pos, miss1, miss2, p_zero, margin


def hardy_check(settings: HardySettings, v: float = 1.0) -> HardyReport:
    """Evaluate the Hardy conditions at ``settings`` with visibility ``v`` (eta = 1)."""
    rho, eps = settings.rho, settings.eps
    t1, t1p, t2, t2p = settings.angles
    single1 = float(singles_p_d1(t1, rho))
    single2 = float(singles_p_d2(t2, rho))
    ratio1 = float(bell_pair_p(t1, t2p, rho, v)) / single1 if single1 > 0 else None
    ratio2 = float(bell_pair_p(t1p, t2, rho, v)) / single2 if single2 > 0 else None
    p_pos = float(bell_pair_p(t1, t2, rho, v))
    p_zero = float(bell_pair_p(t1p, t2p, rho, v))
    if ratio1 is None or ratio2 is None:
        return HardyReport(ratio1, ratio2, p_pos, p_zero, -math.inf, False)
    margin = p_pos - p_zero - single1 * (1 - ratio1) - single2 * (1 - ratio2)
    violating = (
        abs(ratio1 - 1) < eps
        and abs(ratio2 - 1) < eps
        and p_zero < eps
        and p_pos > eps
        and margin > _MARGIN_FLOOR
    )
    return HardyReport(ratio1, ratio2, p_pos, p_zero, margin, violating)


def _best_partner_for_d1(theta1, rho, v):
    """theta2' maximizing P(theta1, theta2') / P(theta1), in closed form."""
    c, s = np.cos(theta1), np.sin(theta1)
    # p(theta1, b) = a cos^2 b + 2 o cos b sin b + d sin^2 b
    a = rho * rho * s * s
    d = c * c
    o = -v * rho * c * s
    return 0.5 * np.arctan2(2 * o, a - d)


def _best_partner_for_d2(theta2, rho, v):
    """theta1' maximizing P(theta1', theta2) / P(theta2)."""
    c, s = np.cos(theta2), np.sin(theta2)
    a = s * s
    d = rho * rho * c * c
    o = -v * rho * c * s
    return 0.5 * np.arctan2(2 * o, a - d)


def _seeds(rho, v, eps, grid, n_seeds):
    g = np.linspace(0.0, np.pi, grid, endpoint=False)
    t1, t2 = (a.ravel() for a in np.meshgrid(g, g, indexing="ij"))
    x = np.array([t1, _best_partner_for_d2(t2, rho, v), t2, _best_partner_for_d1(t1, rho, v)])
    p_pos, miss1, miss2, p_zero, _ = _hardy_terms(x, rho, v)
    excess = (np.maximum(miss1, 0) + np.maximum(miss2, 0) + np.maximum(p_zero, 0)) / eps
    # feasible seeds ranked by P(theta1, theta2), the rest by constraint excess
    score = np.where(excess < 1, -p_pos / eps, excess)
    order = np.argsort(score, kind="stable")[:n_seeds]
    return x[:, order].T


def hardy_search(
    R: float,
    v: float = 1.0,
    eps: float = DEFAULT_EPS,
    *,
    grid: int = 180,
    n_seeds: int = 12,
    seed: int = 0,
) -> Optional[HardySettings]:
    """Maximize P(theta1, theta2) subject to the Hardy conditions within ``eps``.

    Seeds come from a ``grid x grid`` scan over (theta1, theta2) with theta1'
    and theta2' set to their best partners; each seed and a slightly jittered
    copy are refined by SLSQP with the constraints held at ``0.999 * eps``.
    Returns ``None`` when no refined point passes :func:`hardy_check`.
    """
    if not 0.0 < R < 1.0:
        raise ValueError(f"reflectivity must lie in (0, 1), got {R!r}")
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v!r}")
    rho = R / (1.0 - R)
    target = 0.999 * eps
    rng = np.random.default_rng(seed)

    def objective(x):
        return -float(_hardy_terms(x, rho, v)[0]) / eps

    constraints = [
        {"type": "ineq", "fun": lambda x: (target - _hardy_terms(x, rho, v)[1]) / eps},
        {"type": "ineq", "fun": lambda x: (target - _hardy_terms(x, rho, v)[2]) / eps},
        {"type": "ineq", "fun": lambda x: (target - _hardy_terms(x, rho, v)[3]) / eps},
        {"type": "ineq", "fun": lambda x: _hardy_terms(x, rho, v)[4] / eps},
    ]

    best: Optional[HardySettings] = None
    best_p = -math.inf
    for x0 in _seeds(rho, v, eps, grid, n_seeds):
        # stationary seeds (P = 0 exactly) need a nudge off the saddle
        for start in (x0, x0 + 1e-3 * rng.standard_normal(4)):
            res = minimize(
                objective,
                start,
                method="SLSQP",
                constraints=constraints,
                options={"ftol": 1e-12, "maxiter": 300},
            )
            angles = [float(a) % math.pi for a in res.x]
            candidate = HardySettings(angles[0], angles[1], angles[2], angles[3], R, eps)
            report = hardy_check(candidate, v)
            if report.violating and report.p_positive > best_p:
                best, best_p = candidate, report.p_positive
    return best


def hardy_visibility_threshold(
    R: float,
    eps: float = DEFAULT_EPS,
    tol: float = 1e-3,
    **search_kw,
) -> Optional[float]:
    """Smallest visibility at which :func:`hardy_search` succeeds, by bisection.

    Assumes feasibility is monotone in ``v``.  Returns ``None`` if even
    ``v = 1`` is infeasible.
    """
    if hardy_search(R, 1.0, eps, **search_kw) is None:
        return None
    lo, hi = 0.0, 1.0
    if hardy_search(R, lo, eps, **search_kw) is not None:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if hardy_search(R, mid, eps, **search_kw) is None:
            lo = mid
        else:
            hi = mid
    return hi
