import numpy as np
import pytest
from hypothesis import given, strategies as st

from spillover.hedging import (CovConfig, HedgingError, conditional_cov_series, default_pairs,
                               event_comparison, ewma_cov, hedge_pair, hedge_ratio_mv,
                               hedge_report)
from spillover.panel import ReturnsPanel, SeriesMeta, split_at
from spillover.synth import SynthSpec, simulate_var
from spillover.tvp import TvpConfig

STATIC = CovConfig(source="static")


def correlated(rho, T=2000, seed=0, scale=(1.0, 1.0)):
    s = np.array([[1.0, rho], [rho, 1.0]]) * np.outer(scale, scale)
    return simulate_var(SynthSpec(np.zeros((2, 2)), s, T, seed=seed))


def test_identity_hedge():
    c = np.random.default_rng(0).standard_normal(500)
    assert hedge_ratio_mv(c, c) == pytest.approx(1.0, abs=1e-12)
    r = ReturnsPanel.from_array(np.column_stack([c, c]), ids=["a", "b"])
    hp = hedge_report(r, [("a", "b")], STATIC)[0]
    assert hp.hr_mean == pytest.approx(1.0, abs=1e-12)
    assert hp.he == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-0.95, 0.95), st.integers(0, 10_000))
def test_static_effectiveness_is_squared_correlation(rho, seed):
    x = correlated(rho, T=400, seed=seed, scale=(1.0, 3.0))
    hp = hedge_pair("x1", "x2", conditional_cov_series(x, STATIC), denominator="short")
    r = np.corrcoef(np.asarray(x.values).T)[0, 1]
    assert abs(hp.he - r**2) < 1e-12


@given(st.integers(0, 10_000))
def test_ratio_sign_flips_with_short_leg(seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(300)
    f = 0.5 * c + rng.standard_normal(300)
    assert hedge_ratio_mv(c, -f) == pytest.approx(-hedge_ratio_mv(c, f), abs=1e-12)
    assert hedge_ratio_mv(c, -2 * c) == pytest.approx(-0.5, abs=1e-12)


def test_price_inputs_are_differenced():
    rng = np.random.default_rng(1)
    r = rng.standard_normal((300, 2)) * 0.01
    p = 100 * np.exp(np.vstack([np.zeros((1, 2)), np.cumsum(r, axis=0)]))
    assert hedge_ratio_mv(p[:, 0], p[:, 1], prices=True) == pytest.approx(
        hedge_ratio_mv(r[:, 0], r[:, 1]), abs=1e-10)


def test_independent_legs():
    x = correlated(0.0, T=5000, seed=2)
    hp = hedge_report(x, [("x1", "x2")], STATIC)[0]
    assert abs(hp.hr_mean) < 0.05 and -0.01 < hp.he < 0.01
    # a noisy dynamic ratio on an unrelated leg only adds variance, about E[hr^2]
    hp = hedge_report(x, [("x1", "x2")], CovConfig(source="ewma"))[0]
    assert abs(hp.hr_mean) < 0.05
    assert hp.he == pytest.approx(-np.mean(hp.hr_series**2), abs=0.01)


def test_direction_matters():
    # the two directions differ unless the legs have equal variance, and
    # with a static source their product is the squared correlation
    x = correlated(0.6, seed=3, scale=(1.0, 4.0))
    cov = conditional_cov_series(x, STATIC)
    for den in ("long", "short"):
        a = hedge_pair("x1", "x2", cov, den).hr_mean
        b = hedge_pair("x2", "x1", cov, den).hr_mean
        assert abs(a - b) > 0.5
        assert a * b == pytest.approx(np.corrcoef(np.asarray(x.values).T)[0, 1] ** 2, abs=1e-12)


def test_long_leg_ratio_can_destroy_effectiveness():
    # a short leg four times as volatile overshoots under the long-leg ratio
    x = correlated(0.6, seed=4, scale=(1.0, 4.0))
    cov = conditional_cov_series(x, STATIC)
    assert hedge_pair("x1", "x2", cov, "long").he < 0
    assert hedge_pair("x1", "x2", cov, "short").he > 0.3


@pytest.mark.parametrize("source", ["static", "ewma", "rolling", "tvp_residual"])
def test_effectiveness_bounded_above(source):
    x = correlated(0.7, T=600, seed=5)
    for hp in hedge_report(x, None, CovConfig(source=source, window=60)):
        assert hp.he <= 1.0
        assert np.all(np.isfinite(hp.hr_series))


def test_ewma_without_decay_is_constant():
    v = np.random.default_rng(6).standard_normal((200, 3))
    h = ewma_cov(v, decay=1.0)
    np.testing.assert_allclose(h, np.broadcast_to(np.cov(v, rowvar=False), h.shape), atol=1e-14)


def test_ewma_tracks_iid_covariance():
    s = np.array([[1.0, 0.5], [0.5, 2.0]])
    x = simulate_var(SynthSpec(np.zeros((2, 2)), s, 5000, seed=7))
    h = ewma_cov(np.asarray(x.values), decay=0.94).mean(axis=0)
    assert np.max(np.abs(h - s) / np.sqrt(np.outer(np.diag(s), np.diag(s)))) < 0.05


def test_ewma_recursion():
    v = np.random.default_rng(8).standard_normal((5, 2))
    h = ewma_cov(v, decay=0.9, init=np.eye(2))
    np.testing.assert_allclose(h[0], np.eye(2))
    np.testing.assert_allclose(h[3], 0.9 * h[2] + 0.1 * np.outer(v[2], v[2]))


def test_rolling_source_uses_prior_rows():
    x = correlated(0.3, T=300, seed=9)
    cov = conditional_cov_series(x, CovConfig(source="rolling", window=50))
    assert len(cov.dates) == 250 and cov.dates[0] == x.dates[50]
    np.testing.assert_allclose(cov.cov[10], np.cov(np.asarray(x.values)[10:60], rowvar=False))
    with pytest.raises(HedgingError):
        conditional_cov_series(x, CovConfig(source="rolling", window=300))


def test_tvp_source_is_previous_step():
    x = correlated(0.3, T=300, seed=10)
    cov = conditional_cov_series(x, CovConfig(tvp=TvpConfig(lag=2)))
    assert len(cov.dates) == 298 and cov.dates[0] == x.dates[2]


def test_invalid_inputs():
    with pytest.raises(HedgingError):
        conditional_cov_series(correlated(0.3, T=50), CovConfig(source="garch"))
    with pytest.raises(HedgingError):
        hedge_ratio_mv(np.ones(10), np.ones(10))
    with pytest.raises(HedgingError):
        hedge_ratio_mv(np.ones(10), np.arange(9.0))
    r = ReturnsPanel.from_array(np.column_stack([np.zeros(50), np.random.default_rng(0).standard_normal(50)]))
    with pytest.raises(HedgingError):
        hedge_report(r, [("x1", "x2")], STATIC)


def test_default_pairs_order():
    meta = [SeriesMeta("P1", "portfolio"), SeriesMeta("P2", "portfolio"),
            SeriesMeta("V", "investor_sentiment")]
    assert default_pairs(meta) == [("P1", "V"), ("P2", "V"), ("V", "P1"), ("V", "P2")]
    assert len(default_pairs([SeriesMeta("a"), SeriesMeta("b"), SeriesMeta("c")])) == 6


def test_event_comparison_detects_correlation_break():
    base = np.array([[1.0, 0.9], [0.9, 1.0]])
    spec = SynthSpec(np.zeros((2, 2)), base, 1000, seed=11, regime_at=500,
                     regime_sigma=np.array([[1.0, 0.2], [0.2, 1.0]]))
    x = simulate_var(spec)
    res = event_comparison(x, [("x1", "x2")], split_at(x, x.dates[500]), CovConfig(source="ewma"))
    assert res.before[0].he - res.after[0].he > 0.4
    null = simulate_var(SynthSpec(np.zeros((2, 2)), base, 1000, seed=11))
    res0 = event_comparison(null, [("x1", "x2")], split_at(null, null.dates[500]),
                            CovConfig(source="ewma"))
    assert abs(res0.before[0].he - res0.after[0].he) < 0.1
    assert len(res0.full[0].hr_series) == 1000
