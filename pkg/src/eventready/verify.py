"""Cross-check of the closed-form fourfold probability against the Fock-space oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock_oracle as fo
from .core_model import BeamSplitter, ExperimentConfig, fourfold_probability, fourfold_terms

__all__ = ["VerifyReport", "random_config", "oracle_probability", "verify_random_configs", "TOLERANCE"]

TOLERANCE = 1e-12


@dataclass(frozen=True)
class VerifyReport:
    n: int
    seed: int
    max_abs_diff: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_abs_diff < self.tolerance


def random_config(rng: np.random.Generator) -> ExperimentConfig:
    """Angles uniform in [0, pi), R uniform in (0, 1), phi uniform in [0, 2 pi), v = 1."""
    theta = rng.uniform(0.0, math.pi, 4)
    R = float(rng.uniform(0.0, 1.0))
    phi = float(rng.uniform(0.0, 2 * math.pi))
    return ExperimentConfig(BeamSplitter.from_reflectivity(R), *map(float, theta), eta=1.0, v=1.0, phi=phi)


def oracle_probability(config: ExperimentConfig, state: fo.Ket | None = None) -> float:
    """Fourfold probability of ``config`` from the Fock-space engine (point detectors)."""
    state = fo.build_state() if state is None else state
    ops = (
        fo.detection_operator_plain("1", config.theta1),
        fo.detection_operator_plain("2", config.theta2),
        fo.detection_operator_primed("1'", config.theta1p, config.bs),
        fo.detection_operator_primed("2'", config.theta2p, config.bs, config.phase),
    )
    return fo.fourfold_expectation(state, ops, config.eta)


def _closed_form(config: ExperimentConfig, b_scale: float) -> float:
    if b_scale == 1.0:
        return fourfold_probability(config)
    # test hook: deliberately corrupt the reflected-branch product
    A, B = fourfold_terms(config)
    B *= b_scale
    return config.eta**2 / 4 * (A * A + B * B - 2 * config.visibility * A * B * math.cos(config.phase))


def verify_random_configs(n: int = 1000, seed: int = 0, *, b_scale: float = 1.0, tolerance: float = TOLERANCE) -> VerifyReport:
    if n < 1:
        raise ValueError("need at least one configuration")
    rng = np.random.default_rng(seed)
    state = fo.build_state()
    worst = 0.0
    for _ in range(n):
        config = random_config(rng)
        worst = max(worst, abs(_closed_form(config, b_scale) - oracle_probability(config, state)))
    return VerifyReport(n, seed, worst, tolerance)
