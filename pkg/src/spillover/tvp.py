"""Time-varying-parameter VAR via a forgetting-factor Kalman filter.

Each equation carries its own coefficient state (the intercept and all lag
coefficients of that equation) with a random-walk transition. The random
walk's innovation covariance is never formed: prediction simply inflates the
state covariance by ``1 / kappa1``. Measurement noise for equation ``i`` is
the ``(i, i)`` element of the EWMA covariance ``S_{t-1}``, which is then
updated with the one-step prediction error:
``S_t = kappa2 * S_{t-1} + (1 - kappa2) * e_t e_t'``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import repair_spsd
from .panel import ReturnsPanel
from .var import _check_sample, fit_var, lag_design, unstack_params


class TvpError(ValueError):
    pass


@dataclass(frozen=True)
class TvpConfig:
    """Hyperparameters of the filter.

    ``init_window`` is the number of leading observations used for the
    least-squares initializer; ``None`` uses the full sample.
    """

    lag: int = 1
    kappa1: float = 0.99
    kappa2: float = 0.96
    prior_scale: float = 0.1
    burn_in: int = 20
    init_window: int | None = None

    def __post_init__(self):
        errors = self.problems()
        if errors:
            raise ValueError("; ".join(errors))

    def problems(self) -> list[str]:
        out = []
        if not (isinstance(self.lag, (int, np.integer)) and self.lag >= 1):
            out.append(f"lag must be a positive integer, got {self.lag!r}")
        for name in ("kappa1", "kappa2"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                out.append(f"{name} must lie in (0, 1], got {v!r}")
        if not self.prior_scale > 0:
            out.append(f"prior_scale must be positive, got {self.prior_scale!r}")
        if self.burn_in < 0:
            out.append(f"burn_in must be >= 0, got {self.burn_in!r}")
        return out


@dataclass(frozen=True)
class TvpPath:
    """Filtered coefficient and covariance path.

    Attributes
    ----------
    coefs : ndarray (T-p, 1+N p, N)
        Stacked coefficients after absorbing each observation; column ``i``
        is equation ``i`` with the intercept in row 0.
    cov : ndarray (T-p, N, N)
        EWMA innovation covariance ``S_t``.
    errors : ndarray (T-p, N)
        One-step prediction errors ``e_t``.
    dates : ndarray (T-p,)
    initial_coefs, initial_cov : ndarray
        State before the first usable observation (least-squares initializer).
    """

    config: TvpConfig
    ids: list
    dates: np.ndarray
    coefs: np.ndarray
    cov: np.ndarray
    errors: np.ndarray
    initial_coefs: np.ndarray
    initial_cov: np.ndarray
    presample_date: object = field(default=None)

    def __len__(self) -> int:
        return self.coefs.shape[0]

    def lag_matrices(self) -> np.ndarray:
        """``(T-p, p, N, N)`` lag matrices in VAR convention."""
        return unstack_params(self.coefs, self.config.lag)[1]


def fit_tvp_var(returns, cfg: TvpConfig | None = None) -> TvpPath:
    """Run the filter over ``returns`` (a ReturnsPanel or ``(T, N)`` array)."""
    cfg = cfg or TvpConfig()
    if isinstance(returns, ReturnsPanel):
        values, ids, dates = np.asarray(returns.values), returns.ids, returns.dates
    else:
        values = np.asarray(returns, dtype=float)
        ids, dates = [f"x{i + 1}" for i in range(values.shape[1])], np.arange(values.shape[0])
    T, N = values.shape
    p = cfg.lag
    if T - p <= cfg.burn_in + 1:
        raise TvpError(f"{T} observations leave no usable steps after lag {p} and burn-in {cfg.burn_in}")
    n_init = T if cfg.init_window is None else cfg.init_window
    if n_init > T:
        raise TvpError(f"init_window {n_init} exceeds sample length {T}")
    try:
        _check_sample(n_init, N, p)
    except ValueError as exc:
        raise TvpError(f"cannot initialize TVP-VAR: {exc}") from None
    init = fit_var(values[:n_init], p)

    Y, X = lag_design(values, p)
    n, K = X.shape
    beta = init.params.T.copy()                      # (N, K), row i = equation i
    P = np.broadcast_to(cfg.prior_scale * np.eye(K), (N, K, K)).copy()
    S = init.sigma.copy()

    coefs = np.empty((n, K, N))
    covs = np.empty((n, N, N))
    errs = np.empty((n, N))
    inv_k1 = 1.0 / cfg.kappa1
    for t in range(n):
        z = X[t]
        P_pred = P * inv_k1
        e = Y[t] - beta @ z
        Pz = P_pred @ z                               # (N, K)
        f = Pz @ z + np.diagonal(S)                   # (N,)
        gain = Pz / f[:, None]
        beta = beta + gain * e[:, None]
        P = P_pred - gain[:, :, None] * Pz[:, None, :]
        P = 0.5 * (P + np.swapaxes(P, 1, 2))
        S = cfg.kappa2 * S + (1.0 - cfg.kappa2) * np.outer(e, e)
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(S)) and np.all(np.isfinite(P))):
            raise TvpError(f"non-finite filter state at step {t} (date {dates[t + p]})")
        coefs[t] = beta.T
        covs[t] = S
        errs[t] = e

    return TvpPath(cfg, list(ids), dates[p:], coefs, covs, errs,
                   init.params.copy(), init.sigma.copy(), presample_date=dates[p - 1])


def path_slice(path: TvpPath, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Lag matrices ``(p, N, N)`` and repaired covariance as of time index ``t``.

    ``t`` indexes the original returns rows. ``t = p - 1`` (the last
    presample row) gives the initialized state; ``t = p .. T-1`` give the
    filtered state after absorbing row ``t``.
    """
    p = path.config.lag
    k = t - p
    if not -1 <= k < len(path):
        raise IndexError(f"time index {t} outside {p - 1}..{p + len(path) - 1}")
    if k == -1:
        params, S = path.initial_coefs, path.initial_cov
    else:
        params, S = path.coefs[k], path.cov[k]
    S, _ = repair_spsd(S)
    return unstack_params(params, p)[1], S
