"""Monte Carlo tallies of preselected Bell-pair detections.

Each trial is one emitted four-photon system.  If the preselector gate opens
(probability ``preselector_efficiency``), the Bell pair takes one of the four
two-channel outcomes {theta1, theta1+90} x {theta2, theta2+90} from the
normalized Bell-pair distribution, and each photon is then detected
independently with probability eta.

Trials are split into fixed-size chunks with their own child seeds
(``numpy.random.SeedSequence.spawn``), so the tally for a given seed does not
depend on how chunks are scheduled or merged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .core_model import BeamSplitter, ExperimentConfig, bell_pair_p
from .hardy import HardySettings
from .inequalities import ChProbabilities

__all__ = [
    "GENERATOR",
    "TrialConfig",
    "CountTally",
    "ChTally",
    "outcome_distribution",
    "simulate",
    "simulate_ch",
    "simulate_hardy",
    "proper_probabilities",
    "postselected_probability",
    "binomial_sigma",
    "hardy_zscore",
]

GENERATOR = "PCG64"
CHUNK = 1 << 18


@dataclass(frozen=True)
class TrialConfig:
    experiment: ExperimentConfig
    n_trials: int
    seed: int = 0
    preselector_efficiency: float = 1.0

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if not 0.0 < self.preselector_efficiency <= 1.0:
            raise ValueError("preselector_efficiency must lie in (0, 1]")


@dataclass
class CountTally:
    """Counts for one analyzer setting pair.

    ``coincidences[i, j]`` counts D1 firing in channel i and D2 in channel j
    (0 = the set angle, 1 = its perpendicular); ``singles_d1[i]`` and
    ``singles_d2[j]`` count each detector regardless of the other.
    """

    n_emitted: int = 0
    gate_open: int = 0
    coincidences: np.ndarray = field(default_factory=lambda: np.zeros((2, 2), dtype=np.int64))
    singles_d1: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))
    singles_d2: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))

    def __add__(self, other: "CountTally") -> "CountTally":
        return CountTally(
            self.n_emitted + other.n_emitted,
            self.gate_open + other.gate_open,
            self.coincidences + other.coincidences,
            self.singles_d1 + other.singles_d1,
            self.singles_d2 + other.singles_d2,
        )

    def __eq__(self, other):
        if not isinstance(other, CountTally):
            return NotImplemented
        return self.as_record() == other.as_record()

    @property
    def outcome_opportunities(self) -> int:
        """Bell pairs released by the gate; each gets exactly one outcome."""
        return self.gate_open

    def as_record(self) -> dict[str, int]:
        """Flat record with stable key names."""
        rec = {"n_emitted": int(self.n_emitted), "gate_open": int(self.gate_open)}
        for i, a in enumerate(("a", "a_perp")):
            for j, b in enumerate(("b", "b_perp")):
                rec[f"counts.{a}.{b}"] = int(self.coincidences[i, j])
        rec["singles.d1"] = int(self.singles_d1[0])
        rec["singles.d1_perp"] = int(self.singles_d1[1])
        rec["singles.d2"] = int(self.singles_d2[0])
        rec["singles.d2_perp"] = int(self.singles_d2[1])
        return rec


def outcome_distribution(experiment: ExperimentConfig) -> np.ndarray:
    """2x2 outcome probabilities of the preselected pair (sums to 1)."""
    rho, v = experiment.bs.rho, experiment.visibility
    t1 = experiment.theta1 + np.array([0.0, np.pi / 2])
    t2 = experiment.theta2 + np.array([0.0, np.pi / 2])
    probs = bell_pair_p(t1[:, None], t2[None, :], rho, v)
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def _simulate_chunk(probs_flat, eta, gate_eff, n, seed_seq) -> CountTally:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    gate = rng.random(n) < gate_eff if gate_eff < 1.0 else np.ones(n, dtype=bool)
    n_gate = int(gate.sum())
    outcome = rng.choice(4, size=n_gate, p=probs_flat)
    det1 = rng.random(n_gate) < eta
    det2 = rng.random(n_gate) < eta
    ch1, ch2 = outcome // 2, outcome % 2
    both = det1 & det2
    coinc = np.bincount(outcome[both], minlength=4).reshape(2, 2)
    s1 = np.bincount(ch1[det1], minlength=2)
    s2 = np.bincount(ch2[det2], minlength=2)
    return CountTally(n, n_gate, coinc.astype(np.int64), s1.astype(np.int64), s2.astype(np.int64))


def simulate(config: TrialConfig) -> CountTally:
    """Tally ``config.n_trials`` emitted systems at the experiment's (theta1, theta2)."""
    exp = config.experiment
    probs = outcome_distribution(exp).ravel()
    sizes = [CHUNK] * (config.n_trials // CHUNK)
    if config.n_trials % CHUNK:
        sizes.append(config.n_trials % CHUNK)
    children = np.random.SeedSequence(config.seed).spawn(len(sizes))
    tally = CountTally()
    for n, child in zip(sizes, children):
        tally = tally + _simulate_chunk(probs, exp.eta, config.preselector_efficiency, n, child)
    return tally


@dataclass
class ChTally:
    """Tallies for the four CH setting pairs, ``n_trials`` systems each."""

    t11: CountTally  # (a1, a2)
    t12: CountTally  # (a1, a2')
    t21: CountTally  # (a1', a2)
    t22: CountTally  # (a1', a2')

    def items(self):
        return (("11", self.t11), ("12", self.t12), ("21", self.t21), ("22", self.t22))


def simulate_ch(config: TrialConfig, theta1p: float, theta2p: float) -> ChTally:
    """Run the four setting pairs (theta1|theta1p) x (theta2|theta2p).

    Here ``theta1p``/``theta2p`` are the alternative Bell-pair analyzer angles;
    the preselector stays as in ``config.experiment``.  Each block gets its own
    child seed.
    """
    exp = config.experiment
    seeds = np.random.SeedSequence(config.seed).generate_state(4, dtype=np.uint64)
    blocks = {}
    for k, (a, b) in enumerate(((exp.theta1, exp.theta2), (exp.theta1, theta2p), (theta1p, exp.theta2), (theta1p, theta2p))):
        sub = replace(config, experiment=replace(exp, theta1=a, theta2=b), seed=int(seeds[k]))
        blocks[k] = simulate(sub)
    return ChTally(blocks[0], blocks[1], blocks[2], blocks[3])


def simulate_hardy(settings: HardySettings, v: float, eta: float, n_trials: int, seed: int = 0) -> ChTally:
    """CH-layout tallies at Hardy settings: a1 = theta1, a2 = theta2, a1' = theta1', a2' = theta2'."""
    exp = ExperimentConfig(BeamSplitter.from_reflectivity(settings.R), settings.theta1, settings.theta2, eta=eta, v=v)
    return simulate_ch(TrialConfig(exp, n_trials, seed), settings.theta1p, settings.theta2p)


def _pooled(*tallies: CountTally):
    n = sum(t.n_emitted for t in tallies)
    if n == 0:
        raise ValueError("empty tally: no emitted systems")
    return n


def proper_probabilities(tally: ChTally) -> ChProbabilities:
    """Counts over emitted systems, the denominators a loophole-free test needs."""
    for _, t in tally.items():
        if t.n_emitted == 0:
            raise ValueError("empty tally: no emitted systems")

    def coinc(t):
        return t.coincidences[0, 0] / t.n_emitted

    # D1 at a1' appears in blocks 21 and 22; D2 at a2 in blocks 11 and 21
    n1 = _pooled(tally.t21, tally.t22)
    n2 = _pooled(tally.t11, tally.t21)
    n_all = _pooled(*(t for _, t in tally.items()))
    s1 = (tally.t21.singles_d1[0] + tally.t22.singles_d1[0]) / n1
    s2 = (tally.t11.singles_d2[0] + tally.t21.singles_d2[0]) / n2
    pinf = sum(int(t.coincidences.sum()) for _, t in tally.items()) / n_all
    p1inf = (tally.t21.coincidences[0].sum() + tally.t22.coincidences[0].sum()) / n1
    pinf2 = (tally.t11.coincidences[:, 0].sum() + tally.t21.coincidences[:, 0].sum()) / n2
    return ChProbabilities(
        p11=float(coinc(tally.t11)),
        p12=float(coinc(tally.t12)),
        p21=float(coinc(tally.t21)),
        p22=float(coinc(tally.t22)),
        s1=float(s1),
        s2=float(s2),
        pinf=float(pinf),
        p1inf=float(p1inf),
        pinf2=float(pinf2),
    )


def postselected_probability(tally: CountTally, outcome: tuple[int, int]) -> float:
    """Share of one outcome among the four coincidence outcomes.

    Independent of eta, which is exactly why coincidence-only analyses hide
    the detection loophole.
    """
    total = int(tally.coincidences.sum())
    if total == 0:
        raise ValueError("no coincidences recorded")
    i, j = outcome
    return int(tally.coincidences[i, j]) / total


def binomial_sigma(p_hat: float, n: int) -> float:
    """Standard error of a frequency: sqrt(p (1 - p) / n)."""
    if n <= 0:
        raise ValueError("need at least one trial")
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n)


def _z(p_hat, target, n):
    p_hat = float(p_hat)
    sigma = binomial_sigma(p_hat, n)
    dev = p_hat - target
    if sigma == 0.0:
        return 0.0 if dev == 0.0 else math.copysign(math.inf, dev)
    return dev / sigma


def hardy_zscore(tally: ChTally) -> Mapping[str, float]:
    """Deviation of each empirical Hardy quantity from its target, in binomial sigmas.

    ``tally`` must be laid out as :func:`simulate_hardy` produces it.  The
    ratios are conditional frequencies within one setting block; the
    ``positive`` entry is the significance of P(theta1, theta2) above zero.
    """
    for _, t in tally.items():
        if t.n_emitted == 0:
            raise ValueError("empty tally: no emitted systems")
    n_d1 = int(tally.t12.singles_d1[0])
    n_d2 = int(tally.t21.singles_d2[0])
    if n_d1 == 0 or n_d2 == 0:
        raise ValueError("a ratio denominator has zero singles")
    r1 = tally.t12.coincidences[0, 0] / n_d1
    r2 = tally.t21.coincidences[0, 0] / n_d2
    p_zero = tally.t22.coincidences[0, 0] / tally.t22.n_emitted
    p_pos = tally.t11.coincidences[0, 0] / tally.t11.n_emitted
    return {
        "ratio1": _z(r1, 1.0, n_d1),
        "ratio2": _z(r2, 1.0, n_d2),
        "zero": _z(p_zero, 0.0, tally.t22.n_emitted),
        "positive": _z(p_pos, 0.0, tally.t11.n_emitted),
    }
