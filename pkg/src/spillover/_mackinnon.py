"""MacKinnon response-surface coefficients for Dickey-Fuller type statistics.

p-values use the 1994 normal-CDF polynomial surfaces; critical values use the
2010 finite-sample surfaces ``c0 + c1/T + c2/T^2 + c3/T^3``. Rows are indexed
by the number of integrated variables (1 = plain ADF, 2 = two-variable
Engle-Granger). Keys name the deterministic terms of the (cointegrating)
regression: ``"n"`` none, ``"c"`` constant.
"""

from __future__ import annotations

import math

import numpy as np

TAU_STAR = {"n": [-1.04, -1.53], "c": [-1.61, -2.62]}
TAU_MIN = {"n": [-19.04, -19.62], "c": [-18.83, -18.86]}
TAU_MAX = {"n": [math.inf, 1.51], "c": [2.74, 0.92]}

# left tail: p = Phi(b0 + b1*t + b2*t^2)
TAU_SMALLP = {
    "n": np.array([[0.6344, 1.2378, 3.2496e-2], [1.9129, 1.3857, 3.5322e-2]]),
    "c": np.array([[2.1659, 1.4412, 3.8269e-2], [2.92, 1.5012, 3.9796e-2]]),
}
# right part: p = Phi(b0 + b1*t + b2*t^2 + b3*t^3)
TAU_LARGEP = {
    "n": np.array([[0.4797, 0.93557, -0.06999, 0.033066],
                   [1.5578, 0.8558, -0.2083, -0.033549]]),
    "c": np.array([[1.7339, 0.93202, -0.12745, -0.010368],
                   [2.1945, 0.64695, -0.29198, -0.042377]]),
}

# [N-1][level(1%, 5%, 10%)] -> (c0, c1, c2, c3)
TAU_2010 = {
    "n": np.array([[[-2.56574, -2.2358, -3.627, 0.0],
                    [-1.941, -0.2686, -3.365, 31.223],
                    [-1.61682, 0.2656, -2.714, 25.364]]]),
    "c": np.array([[[-3.43035, -6.5393, -16.786, -79.433],
                    [-2.86154, -2.8903, -4.234, -40.04],
                    [-2.56677, -1.5384, -2.809, 0.0]],
                   [[-3.89644, -10.9519, -33.527, 0.0],
                    [-3.33613, -6.1101, -6.823, 0.0],
                    [-3.04445, -4.2412, -2.72, 0.0]]]),
}


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def mackinnon_p(stat: float, regression: str = "c", n_vars: int = 1) -> float:
    """Asymptotic p-value of a Dickey-Fuller / Engle-Granger t statistic."""
    k = n_vars - 1
    if stat > TAU_MAX[regression][k]:
        return 1.0
    if stat < TAU_MIN[regression][k]:
        return 0.0
    coef = TAU_SMALLP[regression][k] if stat <= TAU_STAR[regression][k] else TAU_LARGEP[regression][k]
    return _norm_cdf(float(np.polyval(coef[::-1], stat)))


def mackinnon_crit(regression: str = "c", n_vars: int = 1, nobs: float = math.inf) -> np.ndarray:
    """1%, 5%, 10% critical values for sample size ``nobs``."""
    table = TAU_2010[regression][n_vars - 1]
    if math.isinf(nobs):
        return table[:, 0].copy()
    inv = 1.0 / nobs
    return table @ np.array([1.0, inv, inv**2, inv**3])
