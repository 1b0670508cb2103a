# %% [markdown]
# # How efficient must the detectors be?
#
# A Clauser-Horne test that counts against all prepared systems can only be
# violated above a minimal detection efficiency.  An asymmetric beam splitter
# lowers that bound, and lower visibility can be traded against asymmetry.

# %%
import math

import numpy as np

from eventready.optimizer import minimize_threshold, sweep_surface

# %% Balanced splitter, full visibility
r = minimize_threshold(1.0, 1.0)
print(f"rho = 1    : eta_min = {r.eta_min:.6f}   (2(sqrt2 - 1) = {2 * (math.sqrt(2) - 1):.6f})")
print("  angles (deg):", np.degrees(r.angles).round(2))

# %% Strongly asymmetric splitter
r = minimize_threshold(1.0, 0.01)
print(f"rho = 0.01 : eta_min = {r.eta_min:.6f}")

# %% Asymmetry pays for lost visibility
low = minimize_threshold(0.7, 0.25).eta_min
print(f"v = 0.7, R = 0.2 : {low:.4f}   vs   v = 1, R = 0.5 : {minimize_threshold(1.0, 1.0).eta_min:.4f}")

# %% The whole surface (set EVENTREADY_THREADS to control parallelism)
vs = np.linspace(0.6, 1.0, 5)
rhos = np.linspace(0.1, 1.0, 5)
rows = sweep_surface(vs, rhos)
print("\n  v \\ rho " + "".join(f"{x:8.3f}" for x in rhos))
for i, v in enumerate(vs):
    line = rows[i * len(rhos):(i + 1) * len(rhos)]
    print(f"  {v:6.2f}  " + "".join("     ---" if x.eta_min is None else f"{x.eta_min:8.4f}" for x in line))
