# %% [markdown]
# # Hardy-type nonlocality on the preselected pair
#
# Look for settings where theta1 always comes with theta2', theta2 always with
# theta1', theta1' and theta2' never fire together, yet theta1 and theta2
# sometimes do.  A maximally entangled pair leaves no room for this; an
# asymmetric beam splitter does.

# %%
import numpy as np

from eventready.event_sim import hardy_zscore, simulate_hardy
from eventready.hardy import hardy_check, hardy_search

# %%
print("   R     P(theta1, theta2)")
for R in (0.1, 0.2, 0.3, 0.4, 0.5):
    s = hardy_search(R, 1.0)
    print(f" {R:4.2f}   {hardy_check(s).p_positive:.3e}" if s else f" {R:4.2f}   not found")

# %% Lower visibility: asymmetric splitters hold up better near v = 1
for v in (0.999, 0.99):
    p = {R: hardy_check(hardy_search(R, v), v).p_positive for R in (0.1, 0.4)}
    print(f"v = {v}: R = 0.1 -> {p[0.1]:.2e},  R = 0.4 -> {p[0.4]:.2e}")

# %% Counting statistics at the R = 0.2 witness
s = hardy_search(0.2, 1.0)
print("angles (deg):", np.degrees(s.angles).round(3))
z = hardy_zscore(simulate_hardy(s, v=1.0, eta=1.0, n_trials=1_000_000, seed=0))
print({k: round(val, 2) for k, val in z.items()})
