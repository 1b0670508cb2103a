"""Closed-form probabilities for the two-crystal / beam-splitter preselection set-up.

Two type-II downconverters each emit a singlet-like pair.  One photon of each
pair meets the other at a beam splitter (modes 1', 2'); coincident detection
behind polarizers there preselects the remaining two photons (modes 1, 2),
the Bell pair.

Angles are plane-polarization orientations in radians.  Everything here is a
pure function of its arguments and broadcasts over numpy arrays where that is
natural (the optimizer evaluates whole angle grids at once).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "normalize_angle",
    "perpendicular",
    "BeamSplitter",
    "Geometry",
    "ExperimentConfig",
    "q_factor",
    "visibility",
    "fourfold_terms",
    "fourfold_probability",
    "symmetric_probability",
    "partial_entanglement_probability",
    "bell_pair_probability",
    "bell_pair_p",
    "singles_probability_d1",
    "singles_probability_d2",
    "singles_p_d1",
    "singles_p_d2",
    "same_side_fraction",
]

_LOSSLESS_TOL = 1e-12


def normalize_angle(theta):
    """Map an orientation onto the canonical range [0, pi)."""
    theta = np.mod(theta, np.pi)
    # fmod rounding can land exactly on pi for tiny negative inputs
    theta = np.where(theta >= np.pi, 0.0, theta)
    return float(theta) if theta.ndim == 0 else theta


def perpendicular(theta):
    """Orientation of the orthogonal polarizer channel."""
    return normalize_angle(theta + np.pi / 2)


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless beam splitter given by its amplitude coefficients.

    ``t_x**2`` and ``t_y**2`` are the transmittances for the two polarizations,
    ``r_x**2`` and ``r_y**2`` the reflectances.
    """

    t_x: float
    t_y: float
    r_x: float
    r_y: float

    def __post_init__(self):
        for name in ("t_x", "t_y", "r_x", "r_y"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0) or not math.isfinite(value):
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        if abs(self.t_x**2 + self.r_x**2 - 1) > _LOSSLESS_TOL:
            raise ValueError("t_x**2 + r_x**2 must equal 1")
        if abs(self.t_y**2 + self.r_y**2 - 1) > _LOSSLESS_TOL:
            raise ValueError("t_y**2 + r_y**2 must equal 1")

    @classmethod
    def from_reflectivity(cls, R: float) -> "BeamSplitter":
        """Polarization-isotropic splitter with intensity reflectivity ``R``."""
        if not 0.0 <= R <= 1.0:
            raise ValueError(f"reflectivity must lie in [0, 1], got {R!r}")
        r, t = math.sqrt(R), math.sqrt(1.0 - R)
        return cls(t_x=t, t_y=t, r_x=r, r_y=r)

    @classmethod
    def from_rho(cls, rho: float) -> "BeamSplitter":
        """Isotropic splitter with asymmetry ``rho = R/T``."""
        if not rho > 0 or not math.isfinite(rho):
            raise ValueError(f"rho must be positive and finite, got {rho!r}")
        return cls.from_reflectivity(rho / (1.0 + rho))

    @property
    def isotropic(self) -> bool:
        return self.t_x == self.t_y and self.r_x == self.r_y

    def _require_isotropic(self):
        if not self.isotropic:
            raise ValueError("R, T, rho and s are only defined for an isotropic splitter")

    @property
    def R(self) -> float:
        self._require_isotropic()
        return self.r_x**2

    @property
    def T(self) -> float:
        self._require_isotropic()
        return self.t_x**2

    @property
    def rho(self) -> float:
        """R/T; infinite for a perfect mirror."""
        T = self.T
        return math.inf if T == 0 else self.R / T

    @property
    def s(self) -> float:
        """T**2 / (R**2 + T**2), the Bell-pair normalization."""
        R, T = self.R, self.T
        return T**2 / (R**2 + T**2)


@dataclass(frozen=True)
class Geometry:
    """Transverse detector positions z1, z2, fringe spacing L, opening width delta_z."""

    z1: float
    z2: float
    L: float
    delta_z: float = 0.0

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"fringe spacing L must be positive, got {self.L!r}")
        if not self.delta_z >= 0:
            raise ValueError(f"delta_z must be non-negative, got {self.delta_z!r}")

    @property
    def phase(self) -> float:
        return 2 * math.pi * (self.z2 - self.z1) / self.L


@dataclass(frozen=True)
class ExperimentConfig:
    """Full input record for the analytic probabilities.

    ``theta1``/``theta2`` orient the Bell-pair polarizers P1/P2,
    ``theta1p``/``theta2p`` the preselector polarizers P1'/P2'.  Visibility and
    phase come either from ``geometry`` or from the explicit ``v``/``phi``
    override, never both.
    """

    bs: BeamSplitter
    theta1: float
    theta2: float
    theta1p: float = math.pi / 2
    theta2p: float = 0.0
    eta: float = 1.0
    geometry: Optional[Geometry] = None
    v: Optional[float] = field(default=None)
    phi: Optional[float] = field(default=None)

    def __post_init__(self):
        if self.geometry is not None and (self.v is not None or self.phi is not None):
            raise ValueError("give either geometry or a (v, phi) override, not both")
        if self.geometry is None:
            # override defaults: full visibility, symmetric detector placement
            object.__setattr__(self, "v", 1.0 if self.v is None else float(self.v))
            object.__setattr__(self, "phi", 0.0 if self.phi is None else float(self.phi))
            if not 0.0 <= self.v <= 1.0:
                raise ValueError(f"visibility must lie in [0, 1], got {self.v!r}")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError(f"detection efficiency must lie in (0, 1], got {self.eta!r}")
        for name in ("theta1", "theta2", "theta1p", "theta2p", "phi"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ValueError(f"{name} must be finite")

    @property
    def visibility(self) -> float:
        return visibility(self.geometry) if self.geometry is not None else self.v

    @property
    def phase(self) -> float:
        return self.geometry.phase if self.geometry is not None else self.phi


def q_factor(q_x, q_y, theta_i, theta_j):
    """Q(q)_ij = q_x sin(theta_i) cos(theta_j) - q_y cos(theta_i) sin(theta_j)."""
    return q_x * np.sin(theta_i) * np.cos(theta_j) - q_y * np.cos(theta_i) * np.sin(theta_j)


def visibility(geometry: Geometry) -> float:
    """Coincidence visibility [sin(x)/x]**2 with x = pi * delta_z / L."""
    if not geometry.L > 0:
        raise ValueError("fringe spacing L must be positive")
    x = math.pi * geometry.delta_z / geometry.L
    if x == 0.0:
        return 1.0
    return (math.sin(x) / x) ** 2


def fourfold_terms(config: ExperimentConfig) -> tuple[float, float]:
    """The transmitted (A) and reflected (B) amplitude products."""
    bs = config.bs
    t1, t2, t1p, t2p = config.theta1, config.theta2, config.theta1p, config.theta2p
    A = q_factor(bs.t_x, bs.t_y, t1, t1p) * q_factor(bs.t_x, bs.t_y, t2, t2p)
    B = q_factor(bs.r_x, bs.r_y, t1, t2p) * q_factor(bs.r_x, bs.r_y, t2, t1p)
    return float(A), float(B)


def fourfold_probability(config: ExperimentConfig) -> float:
    """Probability that D1, D2, D1' and D2' all fire.

    (eta**2 / 4) * (A**2 + B**2 - 2 v A B cos(phi)), which for ``v = 1`` is the
    point-detector result and otherwise its average over the detector openings.
    """
    A, B = fourfold_terms(config)
    v, phi = config.visibility, config.phase
    return config.eta**2 / 4 * (A * A + B * B - 2 * v * A * B * math.cos(phi))


def symmetric_probability(theta1p, theta2p, theta1, theta2):
    """Fourfold probability for R = T = 1/2, v = 1, phi = 0, eta = 1."""
    return np.sin(theta1p - theta2p) ** 2 * np.sin(theta1 - theta2) ** 2 / 16


def partial_entanglement_probability(bs: BeamSplitter, theta1, theta2):
    """Fourfold probability with the preselector polarizers removed."""
    R, T = bs.R, bs.T
    return ((T - R) ** 2 + 2 * T * R * np.sin(theta1 - theta2) ** 2) / 4


def _pair_weights(rho):
    """(s, s*rho, s*rho**2) with s = 1/(1 + rho**2); rho = inf is a mirror."""
    if np.isinf(rho):
        return 0.0, 0.0, 1.0
    s = 1.0 / (1.0 + rho * rho)
    return s, s * rho, s * rho * rho


def bell_pair_p(theta1, theta2, rho, v=1.0):
    """Efficiency-stripped Bell-pair coincidence probability p(theta1, theta2).

    Parametrized directly by ``rho`` so the optimizer can broadcast over grids.
    """
    w_t, w_x, w_r = _pair_weights(rho)
    c1, s1 = np.cos(theta1), np.sin(theta1)
    c2, s2 = np.cos(theta2), np.sin(theta2)
    return w_t * (c1 * s2) ** 2 - 2 * v * w_x * c1 * s1 * c2 * s2 + w_r * (c2 * s1) ** 2


def singles_p_d1(theta1, rho):
    w_t, _, w_r = _pair_weights(rho)
    return w_t * np.cos(theta1) ** 2 + w_r * np.sin(theta1) ** 2


def singles_p_d2(theta2, rho):
    w_t, _, w_r = _pair_weights(rho)
    return w_t * np.sin(theta2) ** 2 + w_r * np.cos(theta2) ** 2


def bell_pair_probability(bs: BeamSplitter, v: float, theta1, theta2, eta: float = 1.0):
    """Probability that both Bell-pair detectors D1, D2 fire.

    The preselector is fixed at theta1' = 90 deg, theta2' = 0, phi = 0; the
    fourfold probability is scaled by 4 for the other preselector channel
    combinations and by 1/(R**2 + T**2) for photons leaving BS on one side.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v!r}")
    return eta**2 * bell_pair_p(theta1, theta2, bs.rho, v)


def singles_probability_d1(bs: BeamSplitter, theta1, eta: float = 1.0):
    """eta * s * (cos^2 theta1 + rho^2 sin^2 theta1)."""
    return eta * singles_p_d1(theta1, bs.rho)


def singles_probability_d2(bs: BeamSplitter, theta2, eta: float = 1.0):
    """eta * s * (sin^2 theta2 + rho^2 cos^2 theta2)."""
    return eta * singles_p_d2(theta2, bs.rho)


def same_side_fraction(R: float) -> float:
    """Fraction 2R(1-R) of photon pairs leaving the splitter through one port."""
    if not 0.0 <= R <= 1.0:
        raise ValueError(f"reflectivity must lie in [0, 1], got {R!r}")
    return 2 * R * (1 - R)
