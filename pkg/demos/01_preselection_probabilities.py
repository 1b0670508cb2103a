# %% [markdown]
# # Fourfold detection probabilities
#
# Two downconverters each emit a singlet-like pair.  One photon from each pair
# meets the other at a beam splitter; a coincidence behind the polarizers there
# preselects the remaining two photons.  This script walks through the closed
# form and checks it against the brute-force Fock-space engine.

# %%
import math

import numpy as np

from eventready.core_model import (
    BeamSplitter,
    ExperimentConfig,
    Geometry,
    bell_pair_probability,
    fourfold_probability,
    partial_entanglement_probability,
)
from eventready.verify import oracle_probability, verify_random_configs

deg = math.radians

# %% A balanced splitter and the textbook setting
bs = BeamSplitter.from_reflectivity(0.5)
cfg = ExperimentConfig(bs, theta1=deg(45), theta2=deg(135), theta1p=deg(90), theta2p=deg(0))
print("closed form :", fourfold_probability(cfg))
print("Fock engine :", oracle_probability(cfg))

# %% The closed form and the oracle on random configurations
rep = verify_random_configs(1000, seed=0)
print(f"max |difference| over {rep.n} configs: {rep.max_abs_diff:.2e}")

# %% Finite detector openings wash out the interference term
print("\n dz/L   visibility   P(45, 135 | 90, 0)")
for dz in (0.0, 0.25, 0.5, 0.75, 1.0):
    g = Geometry(z1=0.0, z2=0.0, L=1.0, delta_z=dz)
    c = ExperimentConfig(bs, deg(45), deg(135), deg(90), deg(0), geometry=g)
    print(f" {dz:4.2f}   {c.visibility:9.5f}   {fourfold_probability(c):.6f}")

# %% Without preselector polarizers the pair is only partially entangled
print("\n   R    P(theta1 = theta2)   P(theta1 - theta2 = 90)")
for R in (0.1, 0.3, 0.5):
    b = BeamSplitter.from_reflectivity(R)
    print(f" {R:4.2f}   {partial_entanglement_probability(b, 0, 0):.5f}              "
          f"{partial_entanglement_probability(b, 0, deg(90)):.5f}")

# %% With them in place the Bell pair is a proper quantum state: outcomes sum to one
b = BeamSplitter.from_reflectivity(0.2)
t1, t2 = deg(20), deg(75)
outcomes = np.array([[bell_pair_probability(b, 0.9, t1 + i * math.pi / 2, t2 + j * math.pi / 2)
                      for j in (0, 1)] for i in (0, 1)])
print("\nBell-pair outcome table (R = 0.2, v = 0.9):\n", outcomes.round(5), "\nsum:", outcomes.sum())
