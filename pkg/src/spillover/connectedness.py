"""Generalized FEVD and spillover indices.

Conventions: ``table[i, j]`` is the share (percent) of variable ``i``'s
forecast-error variance attributed to shocks in ``j``; rows sum to 100.
The receiver index of ``i`` is its off-diagonal row sum (FROM others), the
giver index its off-diagonal column sum (TO others), and
``npdc[i, j] = table[i, j] - table[j, i]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import repair_spsd
from .panel import ReturnsPanel
from .var import VarModel, _check_sample, fit_var, lag_design, spectral_radius, unstack_params

DEFAULT_HORIZON = 10


class ConnectednessError(ValueError):
    pass


def ma_matrices(coefs: np.ndarray, h: int) -> np.ndarray:
    """Moving-average matrices ``A_0..A_{h-1}`` for lag matrices ``(..., p, N, N)``."""
    coefs = np.asarray(coefs, dtype=float)
    *batch, p, N, _ = coefs.shape
    A = np.zeros(tuple(batch) + (h, N, N))
    A[..., 0, :, :] = np.eye(N)
    for l in range(1, h):
        acc = np.zeros(tuple(batch) + (N, N))
        for j in range(1, min(p, l) + 1):
            acc += coefs[..., j - 1, :, :] @ A[..., l - j, :, :]
        A[..., l, :, :] = acc
    return A


def _gfevd_raw(coefs: np.ndarray, sigma: np.ndarray, h: int, kind: str) -> np.ndarray:
    A = ma_matrices(coefs, h)
    if not np.all(np.isfinite(A)):
        raise ConnectednessError("non-finite moving-average recursion")
    # denominator: total h-step forecast-error variance of each variable
    den = np.einsum("...lij,...jk,...lik->...i", A, sigma, A)
    if kind == "generalized":
        diag = np.diagonal(sigma, axis1=-2, axis2=-1)
        if np.any(diag <= 0):
            raise ConnectednessError("zero shock variance in covariance diagonal")
        AS = A @ sigma[..., None, :, :]
        num = np.sum(AS**2, axis=-3) / diag[..., None, :]
    elif kind == "orthogonal":
        P = np.linalg.cholesky(sigma)
        num = np.sum((A @ P[..., None, :, :]) ** 2, axis=-3)
    else:
        raise ValueError(f"unknown FEVD kind {kind!r}")
    if np.any(den <= 0):
        raise ConnectednessError("zero forecast-error variance")
    return num / den[..., :, None]


def _standardize(raw: np.ndarray) -> np.ndarray:
    return 100.0 * raw / raw.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class FevdTable:
    horizon: int
    raw: np.ndarray
    table: np.ndarray
    ids: list


def gfevd(coefs, sigma=None, h: int = DEFAULT_HORIZON, kind: str = "generalized",
          ids=None) -> FevdTable:
    """h-step forecast-error variance decomposition.

    Parameters
    ----------
    coefs : ndarray (p, N, N) or VarModel
        Lag matrices (a fitted model supplies its own covariance too).
    sigma : ndarray (N, N)
        Innovation covariance.
    h : int
        Horizon; ``h=1`` uses the impact matrix only.
    kind : {"generalized", "orthogonal"}
        Generalized (order invariant) or Cholesky-orthogonalized.
    """
    if isinstance(coefs, VarModel):
        ids = ids if ids is not None else coefs.ids
        sigma = coefs.sigma if sigma is None else sigma
        coefs = coefs.coefs
    coefs = np.asarray(coefs, dtype=float)
    if coefs.ndim == 2:
        coefs = coefs[None]
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if h < 1:
        raise ValueError("horizon must be >= 1")
    if spectral_radius(coefs) >= 1:
        warnings.warn("VAR is not stable (spectral radius >= 1); FEVD may be meaningless",
                      RuntimeWarning, stacklevel=2)
    sigma, _ = repair_spsd(sigma)
    raw = _gfevd_raw(coefs, sigma, h, kind)
    ids = list(ids) if ids is not None else [f"x{i + 1}" for i in range(coefs.shape[-1])]
    return FevdTable(h, raw, _standardize(raw), ids)


@dataclass(frozen=True)
class ConnectednessSummary:
    """Directional spillover indices of one standardized FEVD table."""

    ids: list
    table: np.ndarray
    receiver: np.ndarray
    giver: np.ndarray
    net: np.ndarray
    inc_own: np.ndarray
    npt: np.ndarray
    tci: float

    @property
    def npdc(self) -> np.ndarray:
        return self.table - self.table.T


def _summary_arrays(table: np.ndarray):
    """Receiver, giver, net, inc_own, npt, tci for ``(..., N, N)`` tables."""
    own = np.diagonal(table, axis1=-2, axis2=-1)
    receiver = table.sum(axis=-1) - own
    giver = table.sum(axis=-2) - own
    net = giver - receiver
    # i dominates j when l_ji > l_ij; count over j for each row i
    npt = np.sum(np.swapaxes(table, -1, -2) - table > 0, axis=-1)
    tci = receiver.mean(axis=-1)
    return receiver, giver, net, giver + own, npt, tci


def summarize(f: FevdTable | np.ndarray, ids=None) -> ConnectednessSummary:
    if isinstance(f, FevdTable):
        table, ids = f.table, f.ids
    else:
        table = np.asarray(f, dtype=float)
        ids = list(ids) if ids is not None else [f"x{i + 1}" for i in range(table.shape[0])]
    receiver, giver, net, inc_own, npt, tci = _summary_arrays(table)
    return ConnectednessSummary(list(ids), table, receiver, giver, net, inc_own,
                                npt.astype(int), float(tci))


@dataclass(frozen=True)
class NpdcMatrix:
    values: np.ndarray
    ids: list


def npdc(f: FevdTable) -> NpdcMatrix:
    """Net pairwise directional connectedness ``l_ij - l_ji``."""
    l = f.table
    return NpdcMatrix(l - l.T, list(f.ids))


@dataclass(frozen=True)
class DynamicSeries:
    """Per-date connectedness tables and indices.

    ``tables`` has shape ``(D, N, N)``; index arrays have a leading date axis.
    ``repaired`` flags dates whose covariance needed an SPSD repair.
    """

    ids: list
    dates: np.ndarray
    horizon: int
    tables: np.ndarray
    repaired: np.ndarray

    def __post_init__(self):
        r, g, n, inc, npt, tci = _summary_arrays(self.tables)
        for name, val in (("receiver", r), ("giver", g), ("net", n), ("inc_own", inc),
                          ("npt", npt), ("tci", tci)):
            object.__setattr__(self, name, val)

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def npdc(self) -> np.ndarray:
        return self.tables - np.swapaxes(self.tables, -1, -2)

    def at(self, k: int) -> ConnectednessSummary:
        return summarize(self.tables[k], self.ids)

    def average(self) -> ConnectednessSummary:
        """Summary of the time-averaged table."""
        return summarize(self.tables.mean(axis=0), self.ids)


def _coefs_from_stacked(params: np.ndarray, p: int) -> np.ndarray:
    return unstack_params(params, p)[1]


def dynamic_connectedness(path, h: int = DEFAULT_HORIZON, skip: int | None = None,
                          kind: str = "generalized") -> DynamicSeries:
    """GFEVD at every step of a TVP-VAR path.

    Steps before ``skip`` (default: the path's burn-in) are left out.
    """
    skip = path.config.burn_in if skip is None else skip
    coefs = _coefs_from_stacked(path.coefs[skip:], path.config.lag)
    sigma, repaired = repair_spsd(path.cov[skip:])
    raw = _gfevd_raw(coefs, sigma, h, kind)
    return DynamicSeries(list(path.ids), path.dates[skip:], h, _standardize(raw), repaired)


def _rolling_fits(values: np.ndarray, window: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Lag matrices and residual covariances for every trailing window."""
    Y, X = lag_design(values, p)
    m = window - p
    n_win = Y.shape[0] - m + 1
    idx = np.arange(m)[None, :] + np.arange(n_win)[:, None]
    Xw, Yw = X[idx], Y[idx]
    Q, R = np.linalg.qr(Xw)
    d = np.abs(np.diagonal(R, axis1=-2, axis2=-1))
    if np.any(d <= 1e-11 * d.max(axis=-1, keepdims=True)):
        bad = int(np.argmax(np.any(d <= 1e-11 * d.max(axis=-1, keepdims=True), axis=-1)))
        raise ConnectednessError(f"singular design in rolling window ending at row {bad + window - 1}")
    B = np.linalg.solve(R, np.swapaxes(Q, -1, -2) @ Yw)
    resid = Yw - Xw @ B
    sigma = np.swapaxes(resid, -1, -2) @ resid / m
    return _coefs_from_stacked(B, p), sigma


def rolling_connectedness(returns: ReturnsPanel, window: int, p: int = 1,
                          h: int = DEFAULT_HORIZON, kind: str = "generalized") -> DynamicSeries:
    """Static VAR connectedness re-estimated on each trailing window.

    ``window`` counts observations including the ``p`` presample rows, so a
    window equal to the panel length gives one table identical to the
    full-sample static fit. Each table is stamped with its window's last date.
    """
    values = np.asarray(returns.values)
    T, N = values.shape
    if window > T:
        raise ConnectednessError(f"window {window} exceeds sample length {T}")
    try:
        _check_sample(window, N, p)
    except ValueError as exc:
        raise ConnectednessError(f"window {window} too small: {exc}") from None
    coefs, sigma = _rolling_fits(values, window, p)
    sigma, repaired = repair_spsd(sigma)
    raw = _gfevd_raw(coefs, sigma, h, kind)
    return DynamicSeries(returns.ids, returns.dates[window - 1:], h, _standardize(raw), repaired)


def static_connectedness(returns: ReturnsPanel, p: int = 1, h: int = DEFAULT_HORIZON,
                         kind: str = "generalized") -> ConnectednessSummary:
    model = fit_var(returns, p)
    return summarize(gfevd(model, h=h, kind=kind))
