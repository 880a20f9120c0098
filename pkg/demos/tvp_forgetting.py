"""How the forgetting factor trades tracking speed against noise.

With kappa1 = 1 the filter is ordinary least squares; smaller kappa1
shortens the effective memory (about 1 / (1 - kappa1) observations) and
makes the coefficient path noisier around a constant truth.

Run:  python3 demos/tvp_forgetting.py
"""

import numpy as np

from spillover.synth import SynthSpec, simulate_var
from spillover.tvp import TvpConfig, fit_tvp_var

phi = np.array([[0.5, 0.3], [0.0, 0.5]])
x = simulate_var(SynthSpec(phi, np.eye(2), 3000, seed=32))
print("kappa1   memory   max |error|   rms error")
for k1 in (0.95, 0.99, 0.995, 0.999, 1.0):
    path = fit_tvp_var(x, TvpConfig(kappa1=k1))
    err = path.lag_matrices()[path.config.burn_in:, 0] - phi
    memory = "inf" if k1 == 1 else f"{1 / (1 - k1):.0f}"
    print(f"{k1:6.3f}  {memory:>7}   {np.max(np.abs(err)):10.3f}   {np.sqrt(np.mean(err**2)):9.3f}")
