"""Independent reference computations used by the tests.

Kept deliberately naive: plain numpy over explicit grids, no optimizer.
"""
from __future__ import annotations

import numpy as np


def pair_table(rho, v, step_deg):
    """p(a, b) on a square grid of analyzer angles, plus the two singles tables."""
    g = np.deg2rad(np.arange(0.0, 180.0, step_deg))
    s = 1.0 / (1.0 + rho * rho)
    c, sn = np.cos(g), np.sin(g)
    p = s * (np.outer(c, sn) ** 2 - 2 * v * rho * np.outer(c * sn, c * sn) + rho * rho * np.outer(sn, c) ** 2)
    d1 = s * (c**2 + rho * rho * sn**2)
    d2 = s * (sn**2 + rho * rho * c**2)
    return g, p, d1, d2


def grid_threshold(rho, v, step_deg=1.0):
    """Exact minimum of the efficiency threshold over an angle grid.

    For fixed (a1', a2) the numerator p(a1') + p(a2) is fixed, so only the
    coincidence sum needs maximizing:

        C = p(a1', a2) + max_a1 [ p(a1, a2) + max_a2' ( p(a1', a2') - p(a1, a2') ) ]

    which costs O(n^3) instead of O(n^4).  Returns (eta_min, angles_deg) with
    angles ordered (a1, a2, a1', a2'); eta_min is inf without violation.
    """
    g, p, d1, d2 = pair_table(rho, v, step_deg)
    n = len(g)
    best = (np.inf, None)
    for j1p in range(n):
        # inner[a1, a2'] = p(a1', a2') - p(a1, a2')
        inner = p[j1p][None, :] - p
        m = inner.max(axis=1)
        arg_a2p = inner.argmax(axis=1)
        # outer[a1, a2] = p(a1, a2) + m[a1]
        outer = p + m[:, None]
        c_best = outer.max(axis=0)
        arg_a1 = outer.argmax(axis=0)
        coinc = p[j1p] + c_best
        with np.errstate(divide="ignore", invalid="ignore"):
            eta = np.where(coinc > 0, (d1[j1p] + d2) / coinc, np.inf)
        eta = np.where(eta < 1 - 1e-12, eta, np.inf)
        j2 = int(np.argmin(eta))
        if eta[j2] < best[0]:
            j1 = int(arg_a1[j2])
            best = (float(eta[j2]), tuple(np.rad2deg(g[[j1, j2, j1p, int(arg_a2p[j1])]])))
    return best


def local_strategy_probabilities(lam):
    """CH inputs of one deterministic local strategy at unit efficiency.

    ``lam = (x1, x1p, x2, x2p)``: whether D1 fires at a1 / a1' and D2 at a2 / a2'.
    """
    x1, x1p, x2, x2p = (float(b) for b in lam)
    return dict(p11=x1 * x2, p12=x1 * x2p, p21=x1p * x2, p22=x1p * x2p, s1=x1p, s2=x2)
