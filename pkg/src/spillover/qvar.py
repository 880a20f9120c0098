"""Quantile VAR: equationwise quantile regression on lagged regressors.

The solver minimizes the pinball loss by majorize-minimize reweighted least
squares (each step is a weighted least-squares problem whose weights come
from the current residuals, floored at a smoothing level that shrinks toward
1e-8), and finishes with basis-exchange steps on an interpolating basis of ``K``
observations until the exact subgradient optimality condition holds.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import SingularMatrixError, lstsq_qr, repair_spsd
from .connectedness import DEFAULT_HORIZON, _gfevd_raw, _standardize, _summary_arrays
from .panel import ReturnsPanel
from .var import VarModel, _check_sample, _values, fit_var, lag_design, unstack_params

DEFAULT_QUANTILES = tuple(np.round(np.arange(0.05, 1.0, 0.1), 2))


class QvarError(ValueError):
    pass


class ConvergenceWarning(RuntimeWarning):
    pass


def pinball_loss(resid: np.ndarray, tau: float) -> np.ndarray:
    """Check-function loss summed over the first axis."""
    return np.sum(resid * (tau - (resid < 0)), axis=0)


def _check_tau(tau: float) -> None:
    if not 0 < tau < 1:
        raise QvarError(f"quantile {tau!r} outside (0, 1)")


def quantile_regression(X: np.ndarray, Y: np.ndarray, tau: float, max_iter: int = 200,
                        tol: float = 1e-8, eps_floor: float = 1e-8,
                        polish_every: int = 10) -> tuple[np.ndarray, dict]:
    """Coefficients ``(K, M)`` minimizing the pinball loss for each column of ``Y``.

    Every ``polish_every`` iterations each unfinished column is moved to
    the nearest interpolating basis, improved by basis exchange and checked
    against the exact optimality condition; columns that pass are frozen.
    Returns the coefficients and a dict with ``iterations``, ``converged`` (all columns certified optimal or the
    coefficient change fell below ``tol``) and per-column ``optimal`` flags.
    """
    _check_tau(tau)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    vec = Y.ndim == 1
    if vec:
        Y = Y[:, None]
    n, K = X.shape
    M = Y.shape[1]
    B_ls = lstsq_qr(X, Y)
    B = B_ls.copy()
    scale = np.maximum(np.median(np.abs(Y - X @ B), axis=0), np.finfo(float).tiny)
    eps = 0.1 * scale
    done = np.zeros(M, dtype=bool)
    small_step = False
    it = 0
    for it in range(1, max_iter + 1):
        live = ~done
        Yl, Bl = Y[:, live], B[:, live]
        c = np.maximum(np.abs(Yl - X @ Bl), eps[live])
        sw = np.sqrt(0.5 / c)
        target = Yl + (2.0 * tau - 1.0) * c
        B_new = lstsq_qr(sw.T[:, :, None] * X[None], (sw * target).T).T
        step = np.max(np.abs(B_new - Bl))
        B[:, live] = B_new
        eps = np.maximum(0.5 * eps, eps_floor * scale)
        small = step < tol * (1.0 + np.max(np.abs(B_new)))
        if it % polish_every == 0 or small or it == max_iter:
            for m in np.flatnonzero(live):
                B[:, m] = _polish(X, Y[:, m], B[:, m], tau)
                done[m] = _is_optimal(X, Y[:, m], B[:, m], tau)
        if done.all():
            break
        if small and np.all(eps <= eps_floor * scale * 1.0001):
            small_step = True
            break
    # never worse than the least-squares start
    worse = pinball_loss(Y - X @ B, tau) > pinball_loss(Y - X @ B_ls, tau)
    B[:, worse] = B_ls[:, worse]
    info = {"iterations": it, "converged": bool(done.all() or small_step), "optimal": done}
    return (B[:, 0] if vec else B), info


def _basis_fit(X, y, idx):
    try:
        return np.linalg.solve(X[idx], y[idx])
    except np.linalg.LinAlgError:
        return None


def _basis_multipliers(X, y, b, h, tau):
    """Residuals and the multipliers ``v`` solving ``X_h' v = -g``.

    ``g = sum_{i not in h} x_i psi(r_i)`` with ``psi(r) = tau - 1{r < 0}``.
    The interpolating fit through rows ``h`` is optimal iff every ``v`` lies
    in ``[tau - 1, tau]``.
    """
    r = y - X @ b
    mask = np.ones(len(y), dtype=bool)
    mask[h] = False
    g = X[mask].T @ (tau - (r[mask] < 0))
    return r, np.linalg.solve(X[h].T, -g)


def _is_optimal(X, y, b, tau, tol=1e-9) -> bool:
    K = X.shape[1]
    r = y - X @ b
    h = np.argsort(np.abs(r))[:K]
    if np.max(np.abs(r[h])) > 1e-9 * (1.0 + np.max(np.abs(y))):
        return False
    try:
        _, v = _basis_multipliers(X, y, b, h, tau)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(v >= tau - 1 - tol) and np.all(v <= tau + tol))


def _polish(X, y, b, tau, max_steps: int | None = None, tol: float = 1e-9):
    """Basis-exchange descent from the basis nearest to ``b``.

    Each step drops a basis row whose multiplier violates the optimality
    bounds, moves along the direction that frees only that row's residual,
    and stops at the breakpoint where the directional slope turns
    nonnegative; the row hit there enters the basis.
    """
    n, K = X.shape
    max_steps = max_steps or 50 * K + 50
    h = list(np.argsort(np.abs(y - X @ b))[:K])
    cur = _basis_fit(X, y, h)
    if cur is None:
        return b
    for _ in range(max_steps):
        try:
            r, v = _basis_multipliers(X, y, cur, h, tau)
            Xh_inv = np.linalg.inv(X[h])
        except np.linalg.LinAlgError:
            break
        viol = np.maximum(v - tau, (tau - 1) - v)
        k = int(np.argmax(viol))
        if viol[k] <= tol:
            break
        s = 1.0 if v[k] < tau - 1 else -1.0
        d = s * Xh_inv[:, k]
        slope = s * v[k] + (tau if s < 0 else 1 - tau)
        xd = X @ d
        in_h = np.zeros(n, dtype=bool)
        in_h[h] = True
        with np.errstate(divide="ignore", invalid="ignore"):
            t = r / xd
        cand = np.flatnonzero(~in_h & (np.abs(xd) > 1e-14) & (t > 0))
        if cand.size == 0:
            break
        order = cand[np.argsort(t[cand])]
        enter = None
        for i in order:
            slope += abs(xd[i])
            if slope >= 0:
                enter = i
                break
        if enter is None:
            break
        h[k] = int(enter)
        nxt = _basis_fit(X, y, h)
        if nxt is None:
            break
        cur = nxt
    return cur if pinball_loss(y - X @ cur, tau) <= pinball_loss(y - X @ b, tau) else b


def fit_quantile_var(returns, p: int = 1, tau: float = 0.5, cov: str = "residual",
                     max_iter: int = 200) -> VarModel:
    """VAR(p) at quantile ``tau``.

    ``cov="residual"`` sets ``sigma`` to the uncentered residual cross-product
    over the sample size; ``cov="ols"`` uses the least-squares VAR residual
    covariance instead.
    """
    _check_tau(tau)
    values, ids, dates = _values(returns)
    T, N = values.shape
    _check_sample(T, N, p)
    Y, X = lag_design(values, p)
    try:
        B, info = quantile_regression(X, Y, tau, max_iter=max_iter)
    except SingularMatrixError:
        raise SingularMatrixError(f"singular design in quantile VAR({p}) fit") from None
    if not info["converged"]:
        warnings.warn(f"quantile regression hit the {max_iter}-iteration cap at tau={tau}",
                      ConvergenceWarning, stacklevel=2)
    fitted = X @ B
    resid = Y - fitted
    if cov == "residual":
        sigma = resid.T @ resid / resid.shape[0]
    elif cov == "ols":
        sigma = fit_var(values, p).sigma
    else:
        raise ValueError(f"unknown covariance proxy {cov!r}")
    intercept, coefs = unstack_params(B, p)
    return VarModel(p, intercept, coefs, resid, 0.5 * (sigma + sigma.T), fitted, list(ids),
                    dates[p:], quantile=float(tau))


@dataclass(frozen=True)
class QvarGridResult:
    """Heatmap grids: rows are quantiles, columns are window end dates.

    ``tci`` has shape ``(Q, D)``, ``net`` ``(Q, D, N)`` and ``tables``
    ``(Q, D, N, N)``.
    """

    ids: list
    quantiles: tuple
    dates: np.ndarray
    tci: np.ndarray
    net: np.ndarray
    tables: np.ndarray
    window: int
    horizon: int

    def net_grid(self, series_id: str) -> np.ndarray:
        return self.net[:, :, self.ids.index(series_id)]


def qvar_connectedness_grid(returns: ReturnsPanel, quantiles=DEFAULT_QUANTILES,
                            window: int | None = 200, p: int = 1, h: int = DEFAULT_HORIZON,
                            step: int = 1, cov: str = "residual") -> QvarGridResult:
    """Rolling quantile-VAR connectedness over a quantile grid.

    ``window`` counts observations including presample lags; ``None`` uses
    the whole sample (one column). ``step`` thins the window end points.
    """
    quantiles = tuple(float(q) for q in quantiles)
    if not quantiles:
        raise QvarError("quantile grid is empty")
    for q in quantiles:
        _check_tau(q)
    if any(b <= a for a, b in zip(quantiles, quantiles[1:])):
        raise QvarError("quantile grid must be strictly increasing")
    values = np.asarray(returns.values)
    T, N = values.shape
    window = T if window is None else window
    if window > T:
        raise QvarError(f"window {window} exceeds sample length {T}")
    if step < 1:
        raise QvarError("step must be >= 1")
    _check_sample(window, N, p)
    ends = np.arange(window, T + 1, step)
    Q, D = len(quantiles), len(ends)
    coefs = np.empty((Q, D, p, N, N))
    sig = np.empty((Q, D, N, N))
    for d, end in enumerate(ends):
        Y, X = lag_design(values[end - window:end], p)
        ols_sigma = None
        for q, tau in enumerate(quantiles):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ConvergenceWarning)
                B, _ = quantile_regression(X, Y, tau)
            R = Y - X @ B
            if cov == "residual":
                S = R.T @ R / R.shape[0]
            else:
                if ols_sigma is None:
                    ols_sigma = fit_var(values[end - window:end], p).sigma
                S = ols_sigma
            coefs[q, d] = unstack_params(B, p)[1]
            sig[q, d] = S
    sig, _ = repair_spsd(sig)
    tables = _standardize(_gfevd_raw(coefs, sig, h, "generalized"))
    _, _, net, _, _, tci = _summary_arrays(tables)
    return QvarGridResult(returns.ids, quantiles, returns.dates[ends - 1], tci, net, tables,
                          window, h)
