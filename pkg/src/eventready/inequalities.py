"""Clauser-Horne inequality forms and the detection-efficiency threshold.

Naming follows the CH test layout: detector D1 is set to ``a1`` or ``a1p``,
detector D2 to ``a2`` or ``a2p``.  In the angle tuples used by
:func:`min_efficiency` and the optimizer these are ``(theta1, theta2,
theta1p, theta2p)``: the *Bell-pair* analyzer settings, not the preselector.

Local hidden-variable models satisfy ``-1 <= S <= 0`` for both forms below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .core_model import BeamSplitter, bell_pair_p, singles_p_d1, singles_p_d2

__all__ = [
    "ChProbabilities",
    "ch_loopholefree",
    "ch_ratio",
    "model_ch_probabilities",
    "min_efficiency",
    "min_efficiency_array",
    "THRESHOLD_GUARD",
]

# Thresholds this close to 1 are saturation (S = 0 at eta = 1), not violation.
THRESHOLD_GUARD = 1e-12


@dataclass(frozen=True)
class ChProbabilities:
    """Probabilities entering the CH combinations.

    ``s1`` is the D1 single at ``a1p``, ``s2`` the D2 single at ``a2``.  The
    optional ``pinf``, ``p1inf``, ``pinf2`` are the analyzer-removed
    coincidences P(inf, inf), P(a1p, inf), P(inf, a2) used by the ratio form.
    """

    p11: float
    p12: float
    p21: float
    p22: float
    s1: float
    s2: float
    pinf: Optional[float] = None
    p1inf: Optional[float] = None
    pinf2: Optional[float] = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None and not (-1e-15 <= value <= 1 + 1e-15):
                raise ValueError(f"{f.name} = {value!r} is not a probability")

    @property
    def coincidence_sum(self) -> float:
        """p(a1,a2) - p(a1,a2') + p(a1',a2') + p(a1',a2)."""
        return self.p11 - self.p12 + self.p22 + self.p21


def ch_loopholefree(p: ChProbabilities) -> float:
    """S = p11 - p12 + p22 + p21 - s1 - s2; S > 0 is a violation."""
    return p.coincidence_sum - p.s1 - p.s2


def ch_ratio(p: ChProbabilities) -> float:
    """The no-enhancement form, every term divided by P(inf, inf)."""
    if p.pinf is None or p.p1inf is None or p.pinf2 is None:
        raise ValueError("ratio form needs pinf, p1inf and pinf2")
    if p.pinf == 0:
        raise ZeroDivisionError("P(inf, inf) = 0: the ratio form is undefined")
    return (p.coincidence_sum - p.p1inf - p.pinf2) / p.pinf


def model_ch_probabilities(angles, bs: BeamSplitter, v: float = 1.0, eta: float = 1.0) -> ChProbabilities:
    """CH inputs predicted by the Bell-pair model at efficiency ``eta``.

    Coincidences scale as eta**2, singles as eta.  Removing an analyzer sums a
    detector over both polarizer channels, so P(a1', inf) = eta**2 p(a1') and
    P(inf, inf) = eta**2.
    """
    a1, a2, a1p, a2p = angles
    rho = bs.rho
    e2 = eta * eta
    return ChProbabilities(
        p11=float(e2 * bell_pair_p(a1, a2, rho, v)),
        p12=float(e2 * bell_pair_p(a1, a2p, rho, v)),
        p21=float(e2 * bell_pair_p(a1p, a2, rho, v)),
        p22=float(e2 * bell_pair_p(a1p, a2p, rho, v)),
        s1=float(eta * singles_p_d1(a1p, rho)),
        s2=float(eta * singles_p_d2(a2, rho)),
        pinf=e2,
        p1inf=float(e2 * singles_p_d1(a1p, rho)),
        pinf2=float(e2 * singles_p_d2(a2, rho)),
    )


def min_efficiency_array(theta1, theta2, theta1p, theta2p, rho, v=1.0):
    """Vectorized efficiency threshold; ``inf`` wherever no physical eta violates.

    With coincidences ~ eta**2 and singles ~ eta, the loophole-free CH value
    vanishes at eta = [p(a1') + p(a2)] / [p11 - p12 + p22 + p21].
    """
    singles = singles_p_d1(theta1p, rho) + singles_p_d2(theta2, rho)
    coinc = (
        bell_pair_p(theta1, theta2, rho, v)
        - bell_pair_p(theta1, theta2p, rho, v)
        + bell_pair_p(theta1p, theta2p, rho, v)
        + bell_pair_p(theta1p, theta2, rho, v)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(coinc > 0, singles / coinc, np.inf)
    return np.where((eta > 0) & (eta < 1 - THRESHOLD_GUARD), eta, np.inf)


def min_efficiency(angles, bs: BeamSplitter, v: float = 1.0) -> Optional[float]:
    """Lowest detection efficiency at which ``angles`` violate the CH inequality.

    Returns ``None`` (no violation) when the coincidence combination is not
    positive or the threshold is not below 1.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v!r}")
    value = float(min_efficiency_array(*angles, bs.rho, v))
    return value if math.isfinite(value) else None
