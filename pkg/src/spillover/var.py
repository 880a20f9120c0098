"""Constant-coefficient VAR(p) estimation and residual correlations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import SingularMatrixError, cov_to_corr, lstsq_qr
from .panel import ReturnsPanel


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class VarModel:
    """Fitted ``x_t = d + sum_j phi_j x_{t-j} + w_t``.

    Attributes
    ----------
    lag : int
    intercept : ndarray (N,)
    coefs : ndarray (p, N, N)
        ``coefs[j-1]`` is the lag-``j`` matrix; row ``i`` is equation ``i``.
    residuals : ndarray (T-p, N)
    sigma : ndarray (N, N)
        Residual cross-product divided by ``T - p``.
    fitted : ndarray (T-p, N)
    ids : list of str
    dates : ndarray
        Dates of the residual rows.
    quantile : float or None
        Set for quantile-VAR fits, where ``sigma`` is the (uncentered)
        residual cross-product proxy.
    """

    lag: int
    intercept: np.ndarray
    coefs: np.ndarray
    residuals: np.ndarray
    sigma: np.ndarray
    fitted: np.ndarray
    ids: list
    dates: np.ndarray
    quantile: float | None = None

    @property
    def n_series(self) -> int:
        return self.coefs.shape[1]

    @property
    def nobs(self) -> int:
        return self.residuals.shape[0]

    @property
    def params(self) -> np.ndarray:
        """Stacked ``(1 + N p, N)`` coefficient matrix matching :func:`lag_design`."""
        return stack_params(self.intercept, self.coefs)


def lag_design(values: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Regressand ``Y`` (T-p, N) and design ``[1, x_{t-1}, ..., x_{t-p}]``."""
    values = np.asarray(values, dtype=float)
    T, N = values.shape
    Y = values[p:]
    X = np.empty((T - p, 1 + N * p))
    X[:, 0] = 1.0
    for j in range(1, p + 1):
        X[:, 1 + N * (j - 1): 1 + N * j] = values[p - j: T - j]
    return Y, X


def stack_params(intercept: np.ndarray, coefs: np.ndarray) -> np.ndarray:
    p, N, _ = coefs.shape
    return np.vstack([intercept[None, :]] + [coefs[j].T for j in range(p)])


def unstack_params(B: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`stack_params`; works on stacks ``(..., 1+Np, N)``."""
    N = B.shape[-1]
    intercept = B[..., 0, :]
    lags = B[..., 1:, :].reshape(B.shape[:-2] + (p, N, N))
    return intercept, np.swapaxes(lags, -1, -2)


def _check_sample(T: int, N: int, p: int) -> None:
    if p < 1:
        raise ValueError("lag order must be >= 1")
    if T - p <= N * p + 1:
        raise InsufficientDataError(
            f"{T} observations cannot support a VAR({p}) in {N} variables")


def _values(returns) -> tuple[np.ndarray, list, np.ndarray]:
    if isinstance(returns, ReturnsPanel):
        return np.asarray(returns.values), returns.ids, returns.dates
    values = np.asarray(returns, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return values, [f"x{i + 1}" for i in range(values.shape[1])], np.arange(values.shape[0])


def fit_var(returns, p: int = 1) -> VarModel:
    """Equation-by-equation least squares for a VAR(p) with intercept.

    ``returns`` may be a :class:`ReturnsPanel` or a plain ``(T, N)`` array.
    """
    values, ids, dates = _values(returns)
    T, N = values.shape
    _check_sample(T, N, p)
    Y, X = lag_design(values, p)
    try:
        B = lstsq_qr(X, Y)
    except SingularMatrixError:
        raise SingularMatrixError(f"singular regressor cross-product in VAR({p}) fit") from None
    fitted = X @ B
    resid = Y - fitted
    intercept, coefs = unstack_params(B, p)
    sigma = resid.T @ resid / resid.shape[0]
    sigma = 0.5 * (sigma + sigma.T)
    return VarModel(p, intercept, coefs, resid, sigma, fitted, list(ids), dates[p:])


def select_lag_bic(returns, p_max: int) -> int:
    """Lag order in ``1..p_max`` minimizing BIC on the common sample."""
    values, _, _ = _values(returns)
    T, N = values.shape
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    _check_sample(T, N, p_max)
    n = T - p_max
    best, best_p = np.inf, 1
    for p in range(1, p_max + 1):
        Y, X = lag_design(values[p_max - p:], p)
        B = lstsq_qr(X, Y)
        resid = Y - X @ B
        sign, logdet = np.linalg.slogdet(resid.T @ resid / n)
        if sign <= 0:
            raise SingularMatrixError("singular residual covariance during lag selection")
        bic = logdet + np.log(n) / n * N * (N * p + 1)
        if bic < best - 1e-12:
            best, best_p = bic, p
    return best_p


def companion(coefs: np.ndarray) -> np.ndarray:
    """``(Np, Np)`` companion matrix of lag matrices ``(p, N, N)``."""
    coefs = np.asarray(coefs, dtype=float)
    p, N, _ = coefs.shape
    C = np.zeros((N * p, N * p))
    C[:N] = np.concatenate(list(coefs), axis=1)
    if p > 1:
        C[N:, :-N] = np.eye(N * (p - 1))
    return C


def spectral_radius(coefs: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(companion(coefs)))))


def stability_check(model: VarModel) -> float:
    """Spectral radius of the companion matrix; values >= 1 mean non-stationary."""
    return spectral_radius(model.coefs)


@dataclass(frozen=True)
class CorrelationPair:
    conditional: np.ndarray
    partial: np.ndarray
    ids: list


def correlation_pair(cov: np.ndarray, ids=None) -> CorrelationPair:
    """Correlation and partial correlation (via the precision matrix) of ``cov``."""
    C = cov_to_corr(np.asarray(cov, dtype=float))
    try:
        P = np.linalg.inv(C)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("covariance is singular; partial correlation undefined") from None
    if not np.all(np.isfinite(P)) or np.linalg.cond(C) > 1e14:
        raise SingularMatrixError("covariance is singular; partial correlation undefined")
    d = np.sqrt(np.diag(P))
    partial = -P / np.outer(d, d)
    partial = 0.5 * (partial + partial.T)
    np.fill_diagonal(partial, 1.0)
    ids = list(ids) if ids is not None else [f"x{i + 1}" for i in range(C.shape[0])]
    return CorrelationPair(C, np.clip(partial, -1.0, 1.0), ids)


def residual_correlations(model: VarModel) -> CorrelationPair:
    return correlation_pair(model.sigma, model.ids)


def return_correlations(returns: ReturnsPanel) -> CorrelationPair:
    """Same pair computed on raw returns instead of VAR residuals."""
    return correlation_pair(np.cov(np.asarray(returns.values), rowvar=False), returns.ids)
