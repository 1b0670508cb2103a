"""Brute-force Fock-space evaluation of the fourfold detection probability.

The four-photon state is held as a map from occupation vectors over the eight
modes (1x, 1y, 1'x, 1'y, 2x, 2y, 2'x, 2'y) to complex amplitudes.  Detection
operators are linear combinations of single-mode annihilators and are applied
term by term; the probability is the squared norm of what survives.  Nothing
here knows the closed-form result, which is the point.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .core_model import BeamSplitter

__all__ = [
    "MODES",
    "mode_index",
    "Ket",
    "DetectionOperator",
    "build_state",
    "detection_operator_primed",
    "detection_operator_plain",
    "fourfold_expectation",
]

SPATIAL = ("1", "1'", "2", "2'")
MODES = tuple((spatial, pol) for spatial in SPATIAL for pol in ("x", "y"))
_INDEX = {mode: i for i, mode in enumerate(MODES)}

Occupation = tuple  # 8 non-negative ints, ordered as MODES


def mode_index(spatial: str, pol: str) -> int:
    return _INDEX[(spatial, pol)]


class Ket:
    """Immutable superposition of occupation-number basis states."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Occupation, complex] | None = None):
        cleaned = {}
        for occ, amp in (terms or {}).items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != len(MODES):
                raise ValueError(f"occupation vector needs {len(MODES)} entries")
            if any(n < 0 for n in occ):
                raise ValueError("negative occupation")
            if any(n > 1 for n in occ):
                raise ValueError("occupations above 1 are outside this engine's domain")
            if amp != 0:
                cleaned[occ] = cleaned.get(occ, 0) + complex(amp)
        self._terms = MappingProxyType({k: a for k, a in cleaned.items() if a != 0})

    @property
    def terms(self) -> Mapping[Occupation, complex]:
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __add__(self, other: "Ket") -> "Ket":
        out = dict(self._terms)
        for occ, amp in other._terms.items():
            out[occ] = out.get(occ, 0) + amp
        return Ket(out)

    def __rmul__(self, scalar: complex) -> "Ket":
        return Ket({occ: scalar * amp for occ, amp in self._terms.items()})

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self._terms.values())

    def is_zero(self) -> bool:
        return not self._terms

    def __repr__(self):
        return f"Ket({dict(self._terms)!r})"


@dataclass(frozen=True)
class DetectionOperator:
    """sum_k c_k a_k over single-mode annihilators; ``coefficients`` maps mode index to c_k."""

    coefficients: Mapping[int, complex]

    def apply(self, ket: Ket) -> Ket:
        out: dict[Occupation, complex] = {}
        for occ, amp in ket.terms.items():
            for mode, coeff in self.coefficients.items():
                if occ[mode] == 0:
                    continue  # annihilating an empty mode gives the zero vector
                lowered = occ[:mode] + (occ[mode] - 1,) + occ[mode + 1:]
                # sqrt(n) factor is 1 because occupations are capped at 1
                out[lowered] = out.get(lowered, 0) + coeff * amp
        return Ket(out)

    def __call__(self, ket: Ket) -> Ket:
        return self.apply(ket)


def _occupation(*modes) -> Occupation:
    occ = [0] * len(MODES)
    for mode in modes:
        occ[mode_index(*mode)] += 1
    return tuple(occ)


def build_state() -> Ket:
    """Product of the two singlet-like pairs (1, 1') and (2, 2')."""
    terms = {}
    pair1 = ((("1", "x"), ("1'", "y"), 1), (("1", "y"), ("1'", "x"), -1))
    pair2 = ((("2", "x"), ("2'", "y"), 1), (("2", "y"), ("2'", "x"), -1))
    for a, ap, sign1 in pair1:
        for b, bp, sign2 in pair2:
            terms[_occupation(a, ap, b, bp)] = 0.5 * sign1 * sign2
    return Ket(terms)


def detection_operator_primed(which: str, theta: float, bs: BeamSplitter, phi: float = 0.0) -> DetectionOperator:
    """Field at D1' or D2' behind the beam splitter and polarizer at ``theta``.

    The transmitted branch comes from the same-numbered input mode; the
    reflected branch from the other one, with a factor i.  The whole relative
    phase ``phi`` sits on the reflected branch of D2'.
    """
    if which not in ("1'", "2'"):
        raise ValueError(f"primed detector must be 1' or 2', got {which!r}")
    other = "2'" if which == "1'" else "1'"
    c, s = math.cos(theta), math.sin(theta)
    refl = 1j * (cmath.exp(1j * phi) if which == "2'" else 1)
    coeffs = {
        mode_index(which, "x"): bs.t_x * c,
        mode_index(which, "y"): bs.t_y * s,
        mode_index(other, "x"): refl * bs.r_x * c,
        mode_index(other, "y"): refl * bs.r_y * s,
    }
    return DetectionOperator({k: complex(v) for k, v in coeffs.items() if v != 0})


def detection_operator_plain(which: str, theta: float) -> DetectionOperator:
    """Field at D1 or D2 behind a polarizer at ``theta`` (global phase dropped)."""
    if which not in ("1", "2"):
        raise ValueError(f"plain detector must be 1 or 2, got {which!r}")
    coeffs = {mode_index(which, "x"): math.cos(theta), mode_index(which, "y"): math.sin(theta)}
    return DetectionOperator({k: complex(v) for k, v in coeffs.items() if v != 0})


def fourfold_expectation(state: Ket, ops, eta: float = 1.0) -> float:
    """eta**2 * || E1 E2 E1' E2' |state> ||**2.

    ``ops`` is ``(E1, E2, E1p, E2p)``; they are applied right to left, so E2'
    acts first.
    """
    e1, e2, e1p, e2p = ops
    ket = state
    for op in (e2p, e1p, e2, e1):
        ket = op.apply(ket)
    return eta**2 * ket.norm_squared()
