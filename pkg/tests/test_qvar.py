import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from spillover.qvar import (DEFAULT_QUANTILES, QvarError, fit_quantile_var, pinball_loss,
                            quantile_regression, qvar_connectedness_grid)
from spillover.synth import SynthSpec, simulate_var
from spillover.var import fit_var, lag_design

PHI = np.array([[[0.4, 0.2], [0.1, 0.3]]])


def lp_quantile(X, y, tau):
    """Pinball minimization as a linear program: y = Xb + u - v, u, v >= 0."""
    n, K = X.shape
    c = np.concatenate([np.zeros(K), tau * np.ones(n), (1 - tau) * np.ones(n)])
    A = np.hstack([X, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * K + [(0, None)] * (2 * n)
    res = linprog(c, A_eq=A, b_eq=y, bounds=bounds, method="highs")
    return res.x[:K], res.fun


@pytest.mark.parametrize("tau", [0.05, 0.25, 0.5, 0.8, 0.95])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_matches_linear_program(tau, seed):
    rng = np.random.default_rng(seed)
    n = 150
    X = np.column_stack([np.ones(n), rng.standard_normal((n, 2))])
    y = X @ [0.3, 1.0, -0.5] + rng.standard_t(3, n)
    b, info = quantile_regression(X, y, tau)
    _, fun = lp_quantile(X, y, tau)
    assert pinball_loss(y - X @ b, tau) <= fun * (1 + 1e-9) + 1e-9
    assert info["converged"]


def test_median_close_to_least_squares():
    x = simulate_var(SynthSpec(PHI, np.eye(2), 5000, seed=11))
    q = fit_quantile_var(x, 1, 0.5)
    ls = fit_var(x, 1)
    assert np.max(np.abs(q.coefs - ls.coefs)) < 0.05


def test_tau_out_of_range():
    x = simulate_var(SynthSpec(PHI, np.eye(2), 200, seed=0))
    for tau in (0.0, 1.0, 1.2, -0.1):
        with pytest.raises(QvarError):
            fit_quantile_var(x, 1, tau)


def test_intercept_only_is_order_statistic():
    y = np.random.default_rng(3).standard_normal(101)
    X = np.ones((101, 1))
    ys = np.sort(y)
    prev = -np.inf
    for tau in (0.05, 0.2, 0.5, 0.7, 0.95):
        b, _ = quantile_regression(X, y, tau)
        # with n * tau non-integer the minimizer is the ceil(n tau)-th order statistic
        k = int(np.ceil(101 * tau)) - 1
        assert abs(b[0] - ys[k]) < 1e-6
        assert b[0] >= prev
        prev = b[0]


@given(st.floats(0.02, 0.98), st.integers(0, 1000))
def test_pinball_never_worse_than_least_squares(tau, seed):
    rng = np.random.default_rng(seed)
    n = 80
    X = np.column_stack([np.ones(n), rng.standard_normal(n)])
    y = X @ [1.0, 2.0] + rng.standard_cauchy(n)
    b, _ = quantile_regression(X, y, tau)
    b_ls = np.linalg.lstsq(X, y, rcond=None)[0]
    assert pinball_loss(y - X @ b, tau) <= pinball_loss(y - X @ b_ls, tau) + 1e-9


def test_residual_covariance_proxy():
    x = simulate_var(SynthSpec(PHI, np.eye(2), 400, seed=5))
    m = fit_quantile_var(x, 1, 0.25)
    R = m.residuals
    np.testing.assert_allclose(m.sigma, R.T @ R / len(R), atol=1e-12)
    assert m.quantile == 0.25
    ols = fit_quantile_var(x, 1, 0.25, cov="ols")
    np.testing.assert_allclose(ols.sigma, fit_var(x, 1).sigma)


def test_grid_shapes_and_invariants():
    x = simulate_var(SynthSpec(PHI, np.array([[1.0, 0.3], [0.3, 1.0]]), 320, seed=6))
    g = qvar_connectedness_grid(x, window=200, step=20)
    Q, D = len(DEFAULT_QUANTILES), len(range(200, 321, 20))
    assert g.tci.shape == (Q, D) and g.net.shape == (Q, D, 2)
    assert g.tables.shape == (Q, D, 2, 2)
    assert np.all((0 <= g.tci) & (g.tci <= 100))
    np.testing.assert_allclose(g.net.sum(axis=-1), 0.0, atol=1e-9)
    np.testing.assert_allclose(g.tables.sum(axis=-1), 100.0)
    assert g.net_grid("x2").shape == (Q, D)
    assert g.dates[-1] == x.dates[-1]


def test_grid_cell_matches_direct_fit():
    x = simulate_var(SynthSpec(PHI, np.eye(2), 260, seed=8))
    g = qvar_connectedness_grid(x, quantiles=(0.25, 0.75), window=200, step=30)
    from spillover.connectedness import gfevd, summarize
    m = fit_quantile_var(x.rows(30, 230), 1, 0.75)
    s = summarize(gfevd(m))
    assert abs(g.tci[1, 1] - s.tci) < 1e-8


def test_symmetric_innovations_give_symmetric_tci():
    x = simulate_var(SynthSpec(PHI, np.array([[1.0, 0.5], [0.5, 1.0]]), 4000, seed=9))
    g = qvar_connectedness_grid(x, window=None)
    tci = g.tci[:, 0]
    assert np.max(np.abs(tci - tci[::-1])) < 3.0


def test_grid_errors():
    x = simulate_var(SynthSpec(PHI, np.eye(2), 100, seed=0))
    with pytest.raises(QvarError):
        qvar_connectedness_grid(x, window=101)
    with pytest.raises(QvarError):
        qvar_connectedness_grid(x, quantiles=(0.5, 0.3), window=50)
    with pytest.raises(QvarError):
        qvar_connectedness_grid(x, quantiles=(), window=50)
    with pytest.raises(QvarError):
        qvar_connectedness_grid(x, window=50, step=0)
