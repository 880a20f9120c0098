"""Descriptive statistics and the univariate / pairwise test battery.

Every test returns a :class:`TestResult` whose ``decision`` is ``"reject"``
exactly when ``p_value < level``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ._linalg import SingularMatrixError, lstsq_qr
from ._mackinnon import mackinnon_crit, mackinnon_p
from .panel import EventSplit, ReturnsPanel, _Panel
from .var import fit_var

SIGNIFICANCE_LADDER = (0.1, 0.05, 0.01, 0.005)
STARS = (".", "*", "**", "***")

# role pairs behind the six bidirectional cointegration hypotheses
HYPOTHESES = {
    "H1": ("investor_sentiment", "portfolio"),
    "H2": ("energy_market", "portfolio"),
    "H3": ("shipping_cost", "portfolio"),
    "H4": ("investor_sentiment", "energy_market"),
    "H5": ("investor_sentiment", "shipping_cost"),
    "H6": ("energy_market", "shipping_cost"),
}


class DiagnosticsError(ValueError):
    pass


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    lag: int | None = None
    level: float = 0.05
    critical_value: float | None = None
    extra: dict = field(default_factory=dict)

    __test__ = False  # keep pytest from collecting this class

    @property
    def decision(self) -> str:
        return "reject" if self.p_value < self.level else "fail_to_reject"

    @property
    def rejected(self) -> bool:
        return self.p_value < self.level


def significance_stars(p: float) -> str:
    """Marker for the strictest ladder level that ``p`` meets."""
    mark = ""
    for level, star in zip(SIGNIFICANCE_LADDER, STARS):
        if p <= level:
            mark = star
    return mark


def _vector(x, name="x") -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise DiagnosticsError(f"{name} contains non-finite values")
    return x


def _moments(x: np.ndarray) -> tuple[float, float]:
    """Sample skewness and raw (non-excess) kurtosis from central moments."""
    d = x - x.mean()
    m2 = np.mean(d**2)
    if m2 <= (1e-14 * np.max(np.abs(x))) ** 2:
        raise DiagnosticsError("zero variance input")
    return float(np.mean(d**3) / m2**1.5), float(np.mean(d**4) / m2**2)


def jarque_bera(x, level: float = 0.05) -> TestResult:
    x = _vector(x)
    n = x.size
    if n < 8:
        raise DiagnosticsError(f"Jarque-Bera needs n >= 8, got {n}")
    s, k = _moments(x)
    jb = n / 6.0 * (s**2 + (k - 3.0) ** 2 / 4.0)
    return TestResult(jb, float(stats.chi2.sf(jb, 2)), level=level,
                      extra={"skewness": s, "kurtosis": k})


def ljung_box_sq(x, lags: int = 20, level: float = 0.05) -> TestResult:
    """Ljung-Box Q on the squared series."""
    x = _vector(x)
    n = x.size
    if n <= lags + 1:
        raise DiagnosticsError(f"Ljung-Box with {lags} lags needs n > {lags + 1}, got {n}")
    z = x**2
    z = z - z.mean()
    denom = np.dot(z, z)
    if denom == 0:
        raise DiagnosticsError("squared series has zero variance")
    k = np.arange(1, lags + 1)
    rho = np.array([np.dot(z[j:], z[:-j]) for j in k]) / denom
    q = n * (n + 2) * np.sum(rho**2 / (n - k))
    return TestResult(float(q), float(stats.chi2.sf(q, lags)), lag=lags, level=level)


@dataclass(frozen=True)
class DescriptiveRow:
    id: str
    mean: float
    median: float
    sd: float
    skewness: float
    kurtosis: float
    jb_stat: float
    jb_p: float
    q2_stat: float
    q2_p: float


def describe(returns: ReturnsPanel, lags: int = 20) -> list[DescriptiveRow]:
    rows = []
    for sid in returns.ids:
        x = np.asarray(returns.column(sid))
        if x.size < max(25, lags + 5):
            raise DiagnosticsError(f"series {sid!r} too short ({x.size}) for descriptive statistics")
        jb = jarque_bera(x)
        if np.ptp(x**2) == 0:
            # constant squares carry no serial dependence to detect
            q2_stat, q2_p = 0.0, 1.0
        else:
            q2 = ljung_box_sq(x, lags)
            q2_stat, q2_p = q2.statistic, q2.p_value
        rows.append(DescriptiveRow(
            sid, float(x.mean()), float(np.median(x)), float(x.std(ddof=1)),
            jb.extra["skewness"], jb.extra["kurtosis"], jb.statistic, jb.p_value,
            q2_stat, q2_p))
    return rows


def default_max_lag(n: int) -> int:
    return int(np.floor(12.0 * (n / 100.0) ** 0.25))


def _adf_regression(x: np.ndarray, lag: int, start: int, trend: str):
    """Design for ``dx_t`` on ``x_{t-1}``, ``dx_{t-1..t-lag}`` (and a constant).

    Rows begin at difference index ``start`` so different lags can share a sample.
    """
    dx = np.diff(x)
    y = dx[start:]
    cols = [x[start:-1]]
    for j in range(1, lag + 1):
        cols.append(dx[start - j: -j])
    if trend == "c":
        cols.append(np.ones_like(y))
    return y, np.column_stack(cols)


def _ols_t(y: np.ndarray, X: np.ndarray) -> tuple[float, float]:
    """t-ratio of the first coefficient and the BIC of the fit."""
    try:
        beta = lstsq_qr(X, y)
    except SingularMatrixError:
        raise SingularMatrixError("singular design matrix in unit-root regression") from None
    resid = y - X @ beta
    n, k = X.shape
    ssr = float(resid @ resid)
    if ssr <= 0:
        raise SingularMatrixError("perfect fit in unit-root regression")
    s2 = ssr / (n - k)
    _, R = np.linalg.qr(X)
    Rinv = np.linalg.solve(R, np.eye(k))
    se = np.sqrt(s2 * np.sum(Rinv[0] ** 2))
    bic = n * np.log(ssr / n) + k * np.log(n)
    return float(beta[0] / se), float(bic)


def adf_test(x, max_lag: int | None = None, lag_rule: str = "info_criterion",
             level: float = 0.05, trend: str = "c", n_vars: int = 1,
             surface: str | None = None) -> TestResult:
    """Augmented Dickey-Fuller t-test.

    With ``lag_rule="info_criterion"`` the augmentation order is chosen in
    ``0..max_lag`` by BIC over a common sample, then the regression is refit
    on all rows available for that order. ``lag_rule="fixed"`` uses
    ``max_lag`` directly. ``trend`` is ``"c"`` (intercept) or ``"n"``;
    ``n_vars`` and ``surface`` select the MacKinnon response surface; the
    surface defaults to ``trend`` (Engle-Granger residuals use ``n_vars=2``
    with the constant-term surface of the cointegrating regression).
    """
    x = _vector(x)
    n = x.size
    if lag_rule not in ("fixed", "info_criterion"):
        raise ValueError(f"unknown lag_rule {lag_rule!r}")
    if max_lag is None:
        max_lag = default_max_lag(n)
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if n <= max_lag + 10:
        raise DiagnosticsError(f"ADF with max_lag={max_lag} needs n > {max_lag + 10}, got {n}")

    if lag_rule == "fixed":
        lag = max_lag
    else:
        bics = [_ols_t(*_adf_regression(x, k, max_lag, trend))[1] for k in range(max_lag + 1)]
        lag = int(np.argmin(bics))
    y, X = _adf_regression(x, lag, lag, trend)
    tstat, _ = _ols_t(y, X)
    surface = surface or trend
    return TestResult(tstat, mackinnon_p(tstat, surface, n_vars), lag=lag, level=level,
                      critical_value=float(mackinnon_crit(surface, n_vars, y.size)[1]),
                      extra={"nobs": int(y.size)})


def engle_granger_pair(y, x, level: float = 0.05, max_lag: int | None = None,
                       lag_rule: str = "info_criterion") -> TestResult:
    """Two-step Engle-Granger test of no cointegration between ``y`` and ``x``.

    Step one regresses ``y`` on a constant and ``x``; step two runs an ADF
    test without intercept on the residuals, with p-values from the
    two-variable MacKinnon surface. The Jarque-Bera test of the residuals is
    attached under ``extra["residual_jb"]``.
    """
    y, x = _vector(y, "y"), _vector(x, "x")
    if y.size != x.size:
        raise DiagnosticsError("y and x differ in length")
    if y.size < 50:
        raise DiagnosticsError(f"Engle-Granger needs n >= 50, got {y.size}")
    if np.ptp(x) == 0:
        raise DiagnosticsError("zero-variance regressor")
    X = np.column_stack([np.ones_like(x), x])
    beta = lstsq_qr(X, y)
    resid = y - X @ beta
    scale = np.sum((y - y.mean()) ** 2)
    if np.sum(resid**2) <= 1e-24 * max(scale, np.finfo(float).tiny):
        raise DiagnosticsError("zero residual: series are exactly collinear")
    adf = adf_test(resid, max_lag=max_lag, lag_rule=lag_rule, level=level,
                   trend="n", n_vars=2, surface="c")
    extra = dict(adf.extra, intercept=float(beta[0]), slope=float(beta[1]),
                 residual_jb=jarque_bera(resid, level))
    return TestResult(adf.statistic, adf.p_value, adf.lag, level, adf.critical_value, extra)


@dataclass(frozen=True)
class CointegrationMatrix:
    """Directional Engle-Granger grid: ``cells[i][j]`` regresses ``i`` on ``j``."""

    ids: list
    cells: list
    hypotheses: dict

    def statistic_matrix(self) -> np.ndarray:
        n = len(self.ids)
        out = np.full((n, n), np.nan)
        for i, j in itertools.permutations(range(n), 2):
            out[i, j] = self.cells[i][j].statistic
        return out


def cointegration_matrix(panel: _Panel, level: float = 0.05, max_lag: int | None = None,
                         lag_rule: str = "info_criterion") -> CointegrationMatrix:
    """Engle-Granger test for every ordered pair, plus role-pair hypotheses.

    A hypothesis is supported when every pair of series carrying its two
    roles rejects no-cointegration in both directions; it is ``None`` when
    the panel has no series with one of the roles.
    """
    n = panel.n_series
    if n < 2:
        raise DiagnosticsError("cointegration matrix needs at least two series")
    v = np.asarray(panel.values)
    cells = [[None] * n for _ in range(n)]
    for i, j in itertools.permutations(range(n), 2):
        cells[i][j] = engle_granger_pair(v[:, i], v[:, j], level, max_lag, lag_rule)
    roles = [m.role for m in panel.meta]
    hyp = {}
    for name, (ra, rb) in HYPOTHESES.items():
        pairs = [(i, j) for i in range(n) for j in range(n)
                 if i != j and roles[i] == ra and roles[j] == rb]
        hyp[name] = (all(cells[i][j].rejected and cells[j][i].rejected for i, j in pairs)
                     if pairs else None)
    return CointegrationMatrix(panel.ids, cells, hyp)


def _chow_statistics(values: np.ndarray, n_before: int, p: int) -> tuple[float, float]:
    """Break-point and sample-split LR statistics for a split after ``n_before`` rows."""
    full = fit_var(values, p)
    first = fit_var(values[:n_before], p)
    second = fit_var(values[n_before:], p)
    t1, t2 = first.nobs, second.nobs
    # full-model residual rows covering the two subsample estimation periods
    idx = np.r_[0:t1, n_before:n_before + t2]
    r = full.residuals[idx]
    s_pooled = r.T @ r / (t1 + t2)
    logdet = _logdet
    bp = (t1 + t2) * logdet(s_pooled) - t1 * logdet(first.sigma) - t2 * logdet(second.sigma)
    s_within = (t1 * first.sigma + t2 * second.sigma) / (t1 + t2)
    ss = (t1 + t2) * (logdet(s_pooled) - logdet(s_within))
    return float(bp), float(ss)


def _logdet(S: np.ndarray) -> float:
    sign, ld = np.linalg.slogdet(S)
    if sign <= 0:
        raise SingularMatrixError("singular residual covariance in Chow test")
    return float(ld)


def chow_test(returns: ReturnsPanel, split: EventSplit, lag: int = 1, reps: int = 199,
              seed: int = 0, level: float = 0.05) -> tuple[TestResult, TestResult]:
    """VAR stability tests at a known break date.

    The break-point statistic compares the pooled residual covariance with
    the two subsample covariances (allowing both coefficients and covariance
    to change); the sample-split statistic compares pooled with the averaged
    within-subsample covariance, so only coefficient changes count. p-values
    and 95% critical values come from a residual bootstrap under the pooled
    model.
    """
    v = np.asarray(returns.values)
    n1 = len(split.before)
    N = v.shape[1]
    for name, m in (("before", n1), ("after", len(v) - n1)):
        if m - lag <= N * lag + 1 + N:
            raise DiagnosticsError(f"'{name}' half too short for a VAR({lag}) Chow test")
    bp, ss = _chow_statistics(v, n1, lag)

    full = fit_var(v, lag)
    rng = np.random.default_rng(seed)
    resid = full.residuals - full.residuals.mean(axis=0)
    draws = resid[rng.integers(0, resid.shape[0], (reps, resid.shape[0]))]
    sims = np.empty((reps,) + v.shape)
    sims[:, :lag] = v[:lag]
    for t in range(lag, v.shape[0]):
        acc = full.intercept + draws[:, t - lag]
        for j in range(lag):
            acc = acc + sims[:, t - j - 1] @ full.coefs[j].T
        sims[:, t] = acc
    boot = np.array([_chow_statistics(sim, n1, lag) for sim in sims])
    out = []
    for k, stat in enumerate((bp, ss)):
        p = (1 + np.sum(boot[:, k] >= stat)) / (reps + 1)
        out.append(TestResult(stat, float(p), lag=lag, level=level,
                              critical_value=float(np.quantile(boot[:, k], 0.95)),
                              extra={"reps": reps}))
    return out[0], out[1]
