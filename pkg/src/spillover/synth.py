"""Synthetic VAR panels with known ground truth, plus a Monte-Carlo FEVD oracle.

Random numbers come from numpy's PCG64 (128-bit state). Independent
replication streams are derived from a master seed with
``np.random.SeedSequence(seed).spawn(k)``, so results do not depend on the
order in which replications are evaluated.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

import numpy as np

from .panel import ReturnsPanel, SeriesMeta
from .var import spectral_radius

BURN = 500


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthSpec:
    """Data-generating VAR.

    When ``regime_at`` is set, ``regime_coefs`` and/or ``regime_sigma`` take
    over from that row onward (the ``regime_change`` scenario).
    """

    coefs: np.ndarray
    sigma: np.ndarray
    T: int
    seed: int = 0
    intercept: np.ndarray | None = None
    scenario: str = "custom"
    ids: tuple = ()
    regime_at: int | None = None
    regime_coefs: np.ndarray | None = None
    regime_sigma: np.ndarray | None = None
    allow_explosive: bool = False
    meta: tuple = field(default=(), repr=False)

    def __post_init__(self):
        coefs = np.asarray(self.coefs, dtype=float)
        if coefs.ndim == 2:
            coefs = coefs[None]
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "sigma", np.atleast_2d(np.asarray(self.sigma, dtype=float)))
        if self.sigma.shape != (self.N, self.N):
            raise SynthError(f"sigma must be {self.N}x{self.N}")
        if np.min(np.linalg.eigvalsh(0.5 * (self.sigma + self.sigma.T))) < -1e-12:
            raise SynthError("innovation covariance is not positive semi-definite")

    @property
    def N(self) -> int:
        return self.coefs.shape[1]

    @property
    def p(self) -> int:
        return self.coefs.shape[0]


def replication_seeds(seed: int, k: int) -> list[int]:
    """``k`` independent child seeds of ``seed``."""
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(k)]


def _innovations(rng: np.random.Generator, sigma: np.ndarray, n: int) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (sigma + sigma.T))
    root = V * np.sqrt(np.clip(w, 0, None))
    return rng.standard_normal((n, sigma.shape[0])) @ root.T


def _check_stable(coefs: np.ndarray, allow: bool) -> None:
    rho = spectral_radius(coefs)
    if rho >= 1 and not allow:
        raise SynthError(f"explosive specification (spectral radius {rho:.3f}); set allow_explosive")


def simulate_var(spec: SynthSpec) -> ReturnsPanel:
    """Seeded draw of ``spec.T`` rows after discarding 500 burn-in steps."""
    _check_stable(spec.coefs, spec.allow_explosive)
    rng = np.random.default_rng(spec.seed)
    N, p = spec.N, spec.p
    n = BURN + spec.T
    eps = _innovations(rng, spec.sigma, n)
    coefs = np.broadcast_to(spec.coefs, (n, p, N, N))
    if spec.regime_at is not None:
        rc = spec.coefs if spec.regime_coefs is None else np.asarray(spec.regime_coefs, float).reshape(p, N, N)
        _check_stable(rc, spec.allow_explosive)
        coefs = coefs.copy()
        coefs[BURN + spec.regime_at:] = rc
        if spec.regime_sigma is not None:
            eps[BURN + spec.regime_at:] = _innovations(rng, np.asarray(spec.regime_sigma, float),
                                                       n - BURN - spec.regime_at)
    c = np.zeros(N) if spec.intercept is None else np.asarray(spec.intercept, float)
    x = np.zeros((n, N))
    for t in range(n):
        acc = c + eps[t]
        for j in range(1, min(p, t) + 1):
            acc = acc + coefs[t, j - 1] @ x[t - j]
        x[t] = acc
    ids = spec.ids or tuple(f"x{i + 1}" for i in range(N))
    meta = spec.meta or tuple(SeriesMeta(i) for i in ids)
    return ReturnsPanel.from_array(x[BURN:], meta=meta)


def simulate_garch(n: int, omega: float = 0.05, alpha: float = 0.1, beta: float = 0.85,
                   seed: int = 0) -> np.ndarray:
    """GARCH(1,1) returns with Gaussian innovations."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n + BURN)
    h = omega / (1 - alpha - beta)
    out = np.empty(n + BURN)
    for t in range(n + BURN):
        out[t] = np.sqrt(h) * z[t]
        h = omega + alpha * out[t] ** 2 + beta * h
    return out[BURN:]


def random_stable_var(rng: np.random.Generator, N: int, p: int = 1, radius: float = 0.9):
    """Random lag matrices rescaled to a target spectral radius, and a random SPD covariance."""
    coefs = rng.standard_normal((p, N, N))
    # scaling lag j by s**j scales every companion eigenvalue by s
    s = radius / spectral_radius(coefs)
    coefs = coefs * s ** np.arange(1, p + 1)[:, None, None]
    A = rng.standard_normal((N, N))
    sigma = A @ A.T + 0.1 * np.eye(N)
    return coefs, sigma


def scenario(name: str, T: int = 1000, seed: int = 0, **kw) -> SynthSpec:
    """Named ground-truth systems.

    ``one_way_transmitter``
        Series 1 drives all others; nothing feeds back into it.
    ``block_independent``
        Two blocks with no cross-block coefficients or correlation.
    ``regime_change``
        Coefficients scaled by ``kw.get("factor", 2)`` from row ``kw["at"]`` (default ``T // 2``).
    ``supply_chain``
        Seven series: four correlated portfolios that lead a sentiment index,
        an energy price and a shipping index.
    """
    N = kw.get("N", 4)
    if name == "one_way_transmitter":
        coefs = 0.2 * np.eye(N)
        coefs[1:, 0] = kw.get("strength", 0.4)
        return SynthSpec(coefs, np.eye(N), T, seed, scenario=name)
    if name == "block_independent":
        k = N // 2
        coefs = np.zeros((N, N))
        coefs[:k, :k] = 0.15
        coefs[k:, k:] = 0.1
        np.fill_diagonal(coefs, 0.3)
        sigma = np.eye(N)
        sigma[:k, :k] += 0.3
        sigma[k:, k:] += 0.2
        np.fill_diagonal(sigma, 1.0)
        return SynthSpec(coefs, sigma, T, seed, scenario=name)
    if name == "regime_change":
        base = kw.get("base", scenario("one_way_transmitter", T, seed, N=N))
        factor = kw.get("factor", 2.0)
        return replace(base, scenario=name, regime_at=kw.get("at", T // 2),
                       regime_coefs=base.coefs * factor, allow_explosive=False)
    if name == "supply_chain":
        return _supply_chain(T, seed)
    raise SynthError(f"unknown scenario {name!r}")


def _supply_chain(T: int, seed: int) -> SynthSpec:
    ids = ("GII", "GLFOX", "FGIAX", "CSUAX", "BDI", "WTI", "VIX")
    roles = ("portfolio",) * 4 + ("shipping_cost", "energy_market", "investor_sentiment")
    esg = (20.9, 21.6, 19.8, 19.5, None, None, None)
    coefs = np.zeros((7, 7))
    np.fill_diagonal(coefs, [0.02, 0.05, 0.01, 0.03, 0.3, 0.05, -0.1])
    coefs[5, :4] = [0.15, 0.05, 0.2, 0.1]     # portfolios lead energy
    coefs[6, :4] = [-0.3, -0.15, -0.4, -0.3]  # and sentiment
    coefs[4, :4] = [0.05, 0.02, 0.05, 0.04]
    sd = np.array([1.0, 0.9, 1.1, 1.05, 1.6, 2.2, 6.0]) * 0.01
    corr = np.eye(7)
    corr[:4, :4] = 0.85
    corr[:4, 5] = corr[5, :4] = 0.3
    corr[:4, 6] = corr[6, :4] = -0.25
    corr[5, 6] = corr[6, 5] = -0.2
    np.fill_diagonal(corr, 1.0)
    sigma = corr * np.outer(sd, sd)
    # rescale lag coefficients to return units
    coefs = coefs * np.outer(sd, 1 / sd)
    meta = tuple(SeriesMeta(i, r, e) for i, r, e in zip(ids, roles, esg))
    return SynthSpec(coefs, sigma, T, seed, intercept=np.full(7, 2e-4), scenario="supply_chain",
                     ids=ids, meta=meta)


def spec_from_config(path_or_text: str) -> SynthSpec:
    """Read a scenario from an INI file.

    ``[scenario]`` takes ``name``, ``T``, ``seed`` and for ``name = custom``
    the keys ``coefs`` (rows separated by ``;``, lag blocks by ``|``) and
    ``sigma`` (rows separated by ``;``).
    """
    cp = configparser.ConfigParser()
    if "\n" in path_or_text or "[" in path_or_text:
        cp.read_string(path_or_text)
    else:
        with open(path_or_text, encoding="utf-8") as fh:
            cp.read_file(fh)
    sec = cp["scenario"]
    name = sec.get("name", "custom")
    T, seed = sec.getint("T", 1000), sec.getint("seed", 0)
    if name != "custom":
        extra = {k: sec.getfloat(k) for k in ("strength", "factor") if k in sec}
        if "N" in sec:
            extra["N"] = sec.getint("N")
        return scenario(name, T, seed, **extra)
    blocks = [_matrix(b) for b in sec["coefs"].split("|")]
    return SynthSpec(np.array(blocks), _matrix(sec["sigma"]), T, seed,
                     allow_explosive=sec.getboolean("allow_explosive", False))


def _matrix(text: str) -> np.ndarray:
    return np.array([[float(v) for v in row.replace(",", " ").split()]
                     for row in text.strip().split(";") if row.strip()])


def prices_from_returns(returns: ReturnsPanel, start: float = 100.0) -> np.ndarray:
    """Level paths whose log differences reproduce ``returns``."""
    v = np.asarray(returns.values)
    return start * np.exp(np.vstack([np.zeros((1, v.shape[1])), np.cumsum(v, axis=0)]))


def mc_fevd_oracle(spec: SynthSpec, h: int, reps: int = 100_000, seed: int = 0,
                   batches: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo generalized FEVD, standardized to row shares (rows sum to 1).

    For every replication a shock path of length ``h`` is drawn and pushed
    through the VAR recursion from a zero state, giving the h-step forecast
    error. The part of that error explained by variable ``j`` is obtained by
    replacing every shock vector with its conditional expectation given its
    ``j``-th component, ``sigma[:, j] / sigma[j, j] * eps_j``, and running the
    same recursion. Shares are ratios of mean squared explained error to mean
    squared total error. Standard errors come from ``batches`` equal batches.

    Returns
    -------
    shares, stderr : ndarray (N, N)
    """
    if reps < 100:
        raise SynthError("reps must be >= 100")
    _check_stable(spec.coefs, False)
    N, p = spec.N, spec.p
    sigma = spec.sigma
    rng = np.random.default_rng(seed)
    eps = _innovations(rng, sigma, reps * h).reshape(reps, h, N)

    def push(shocks):
        x = np.zeros((reps, h, N))
        for t in range(h):
            acc = shocks[:, t].copy()
            for j in range(1, min(p, t) + 1):
                acc += x[:, t - j] @ spec.coefs[j - 1].T
            x[:, t] = acc
        return x[:, -1]

    total = push(eps) ** 2                                  # (reps, N)
    part = np.empty((reps, N, N))
    for j in range(N):
        cond = eps[:, :, j:j + 1] * (sigma[:, j] / sigma[j, j])[None, None, :]
        part[:, :, j] = push(cond) ** 2

    def shares(idx):
        d = part[idx].mean(axis=0) / total[idx].mean(axis=0)[:, None]
        return d / d.sum(axis=1, keepdims=True)

    est = shares(slice(None))
    groups = np.array_split(np.arange(reps), batches)
    per = np.array([shares(g) for g in groups])
    return est, per.std(axis=0, ddof=1) / np.sqrt(batches)
