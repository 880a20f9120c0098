"""Minimum-variance hedge ratios and hedging effectiveness.

For a long position in ``p1`` hedged with a short position in ``p2`` the
per-date ratio is ``h_{p1,p2,t} / h_{p1,t}`` (conditional covariance over the
long leg's conditional variance). ``denominator="short"`` switches to the
textbook minimum-variance ratio ``h_{p1,p2,t} / h_{p2,t}``. Effectiveness is
``1 - Var(hedged) / Var(unhedged)`` over the same dates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._linalg import repair_spsd
from .panel import EventSplit, ReturnsPanel
from .tvp import TvpConfig, TvpPath, fit_tvp_var

SOURCES = ("tvp_residual", "ewma", "rolling", "static")


class HedgingError(ValueError):
    pass


@dataclass(frozen=True)
class CovConfig:
    """How conditional covariances are produced."""

    source: str = "tvp_residual"
    decay: float = 0.94
    window: int = 120
    tvp: TvpConfig = field(default_factory=TvpConfig)

    def problems(self) -> list[str]:
        out = []
        if self.source not in SOURCES:
            out.append(f"unknown covariance source {self.source!r}")
        if not 0 < self.decay <= 1:
            out.append(f"EWMA decay must lie in (0, 1], got {self.decay!r}")
        if self.window < 2:
            out.append(f"rolling window must be >= 2, got {self.window!r}")
        return out


@dataclass(frozen=True)
class CondCovSeries:
    """Per-date covariance ``cov[t]`` for the return row ``returns.values[t]``.

    Covariances use information up to the previous date, except the
    ``static`` source, which is the full-sample covariance.
    """

    source: str
    returns: ReturnsPanel
    cov: np.ndarray

    @property
    def ids(self) -> list:
        return self.returns.ids

    @property
    def dates(self) -> np.ndarray:
        return self.returns.dates


def ewma_cov(values: np.ndarray, decay: float = 0.94, init: np.ndarray | None = None) -> np.ndarray:
    """``h_t = decay h_{t-1} + (1 - decay) r_{t-1} r_{t-1}'`` with ``h_0 = init``.

    ``init`` defaults to the sample covariance of ``values``.
    """
    values = np.asarray(values, dtype=float)
    T, N = values.shape
    h = np.cov(values, rowvar=False).reshape(N, N) if init is None else np.asarray(init, float)
    out = np.empty((T, N, N))
    for t in range(T):
        out[t] = h
        h = decay * h + (1.0 - decay) * np.outer(values[t], values[t])
    return out


def conditional_cov_series(returns: ReturnsPanel, cfg: CovConfig | None = None,
                           path: TvpPath | None = None) -> CondCovSeries:
    """Conditional covariances aligned to return dates.

    ``tvp_residual`` uses the filter's covariance from the previous step
    (the initializer for the first usable date), fitting the filter when no
    ``path`` is given; ``rolling`` uses the ``window`` rows before each date.
    Rows without a covariance are dropped from the aligned returns.
    """
    cfg = cfg or CovConfig()
    errs = cfg.problems()
    if errs:
        raise HedgingError("; ".join(errs))
    values = np.asarray(returns.values)
    T, N = values.shape
    if cfg.source == "static":
        S = np.cov(values, rowvar=False, ddof=1).reshape(N, N)
        return CondCovSeries("static", returns, np.broadcast_to(S, (T, N, N)).copy())
    if cfg.source == "ewma":
        return CondCovSeries("ewma", returns, ewma_cov(values, cfg.decay))
    if cfg.source == "rolling":
        w = cfg.window
        if w >= T:
            raise HedgingError(f"rolling window {w} leaves no dates in a sample of {T}")
        cov = np.array([np.cov(values[t - w:t], rowvar=False).reshape(N, N) for t in range(w, T)])
        return CondCovSeries("rolling", returns.rows(w, None), cov)
    path = path if path is not None else fit_tvp_var(returns, cfg.tvp)
    p = path.config.lag
    prev = np.concatenate([path.initial_cov[None], path.cov[:-1]])
    prev, _ = repair_spsd(prev)
    return CondCovSeries("tvp_residual", returns.rows(p, None), prev)


def hedge_ratio_mv(c, f, prices: bool = False) -> float:
    """Static minimum-variance ratio ``Cov(c, f) / Var(f)``.

    With ``prices=True`` both inputs are levels and are log-differenced first.
    """
    c = np.asarray(c, dtype=float)
    f = np.asarray(f, dtype=float)
    if prices:
        c, f = np.diff(np.log(c)), np.diff(np.log(f))
    if c.shape != f.shape:
        raise HedgingError("legs differ in length")
    dc = c - c.mean()
    df = f - f.mean()
    vf = np.dot(df, df)
    if vf == 0:
        raise HedgingError("hedge leg has zero variance")
    return float(np.dot(dc, df) / vf)


@dataclass(frozen=True)
class HedgePair:
    long_id: str
    short_id: str
    hr_series: np.ndarray
    hr_mean: float
    he: float
    h_u: float
    dates: np.ndarray = field(repr=False)


def hedge_pair(long_id: str, short_id: str, cov: CondCovSeries,
               denominator: str = "long") -> HedgePair:
    """Dynamic hedge of a one-unit long ``long_id`` position with ``short_id``."""
    i, j = cov.returns.index(long_id), cov.returns.index(short_id)
    if denominator == "long":
        den = cov.cov[:, i, i]
    elif denominator == "short":
        den = cov.cov[:, j, j]
    else:
        raise ValueError(f"unknown denominator {denominator!r}")
    if np.any(den <= 0):
        k = int(np.argmax(den <= 0))
        raise HedgingError(f"zero conditional variance on {cov.dates[k]} for {long_id}/{short_id}")
    hr = cov.cov[:, i, j] / den
    long_r = np.asarray(cov.returns.values[:, i])
    hedged = long_r - hr * np.asarray(cov.returns.values[:, j])
    h_u = float(np.var(long_r, ddof=1))
    if h_u == 0:
        raise HedgingError(f"long leg {long_id} has zero variance")
    he = 1.0 - float(np.var(hedged, ddof=1)) / h_u
    return HedgePair(long_id, short_id, hr, float(hr.mean()), he, h_u, cov.dates)


def default_pairs(meta) -> list[tuple[str, str]]:
    """Portfolio/factor pairs in both directions, portfolios long first.

    Falls back to every ordered pair when no series carries the portfolio role.
    """
    ports = [m.id for m in meta if m.role == "portfolio"]
    facts = [m.id for m in meta if m.role != "portfolio"]
    if not ports or not facts:
        ids = [m.id for m in meta]
        return list(itertools.permutations(ids, 2))
    return [(p, f) for p in ports for f in facts] + [(f, p) for f in facts for p in ports]


def hedge_report(returns: ReturnsPanel, pairs=None, cfg: CovConfig | None = None,
                 denominator: str = "long", path: TvpPath | None = None) -> list[HedgePair]:
    cov = conditional_cov_series(returns, cfg, path)
    pairs = default_pairs(returns.meta) if pairs is None else pairs
    return [hedge_pair(a, b, cov, denominator) for a, b in pairs]


@dataclass(frozen=True)
class HedgeReportSplit:
    split_date: np.datetime64
    full: list
    before: list
    after: list


def event_comparison(returns: ReturnsPanel, pairs, split: EventSplit,
                     cfg: CovConfig | None = None, denominator: str = "long") -> HedgeReportSplit:
    """Hedge report on the full sample and independently on each half."""
    return HedgeReportSplit(
        split.split_date,
        hedge_report(returns, pairs, cfg, denominator),
        hedge_report(split.before, pairs, cfg, denominator),
        hedge_report(split.after, pairs, cfg, denominator),
    )
