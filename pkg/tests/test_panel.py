import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spillover.panel import (PanelError, ReturnsPanel, SeriesMeta, TimeSeriesPanel, load_panel,
                             log_returns, read_meta, split_at, write_wide_csv)

WIDE = """date,A,B,C
2020-01-01,1,2,3
2020-01-02,1.1,2.1,3.1
2020-01-03,1.2,,3.2
2020-01-06,1.3,2.3,3.3
2020-01-07,1.4,2.4,3.4
2020-01-08,1.5,2.5,3.5
"""


def test_wide_inner_join_drops_ragged_date():
    p = load_panel(WIDE)
    assert len(p) == 5
    assert p.ids == ["A", "B", "C"]
    assert np.datetime64("2020-01-03") not in p.dates


def test_long_schema_matches_wide():
    rows = ["date,id,value"]
    for d, a, b in [("2020-01-02", 1.1, 2.1), ("2020-01-01", 1.0, 2.0), ("2020-01-03", 1.2, 2.2)]:
        rows += [f"{d},A,{a}", f"{d},B,{b}"]
    rows.append("2020-01-04,A,1.3")  # B missing on this date
    p = load_panel("\n".join(rows) + "\n", schema="long")
    assert len(p) == 3 and p.ids == ["A", "B"]
    np.testing.assert_array_equal(p.column("B"), [2.0, 2.1, 2.2])


def test_long_duplicate_observation():
    text = "date,id,value\n2020-01-01,A,1\n2020-01-01,A,2\n2020-01-02,A,3\n"
    with pytest.raises(PanelError, match="duplicate observation"):
        load_panel(text, schema="long")


def test_unparseable_date():
    with pytest.raises(PanelError, match="unparseable date"):
        load_panel("date,A\n2020-01-01,1\nnot-a-date,2\n")


def test_empty_intersection():
    with pytest.raises(PanelError, match="no date"):
        load_panel("date,A,B\n2020-01-01,1,\n2020-01-02,,2\n")


def test_nonpositive_price_only_for_log_series():
    text = "date,A,V\n2020-01-01,1,-1\n2020-01-02,2,0\n2020-01-03,3,1\n"
    with pytest.raises(PanelError, match="nonpositive"):
        load_panel(text)
    p = load_panel(text, meta=[SeriesMeta("V", difference="simple")])
    r = log_returns(p)
    np.testing.assert_array_equal(r.column("V"), [1.0, 1.0])


def test_load_is_order_insensitive():
    lines = WIDE.strip().splitlines()
    shuffled = "\n".join([lines[0]] + lines[1:][::-1]) + "\n"
    a, b = load_panel(WIDE), load_panel(shuffled)
    np.testing.assert_array_equal(a.dates, b.dates)
    np.testing.assert_array_equal(a.values, b.values)


def test_meta_sidecar():
    meta = read_meta("id,role,esg_score\nA,portfolio,20.5\nB,energy_market,\n")
    assert meta[0].role == "portfolio" and meta[0].esg_score == 20.5
    assert meta[1].esg_score is None
    with pytest.raises(ValueError):
        SeriesMeta("X", esg_score=-1.0)
    with pytest.raises(ValueError):
        SeriesMeta("X", role="bond")
    with pytest.raises(ValueError):
        SeriesMeta("")


def test_log_returns_closed_forms():
    dates = np.arange("2020-01-01", "2020-01-04", dtype="datetime64[D]")
    const = TimeSeriesPanel(dates, [[5.0], [5.0], [5.0]], (SeriesMeta("K"),))
    np.testing.assert_array_equal(log_returns(const).values[:, 0], [0.0, 0.0])
    e = TimeSeriesPanel(dates, [[1.0], [np.e], [np.e ** 2]], (SeriesMeta("E"),))
    np.testing.assert_allclose(log_returns(e).values[:, 0], [1.0, 1.0], rtol=0, atol=1e-15)


def test_log_returns_exact_formula(rng):
    v = np.exp(rng.standard_normal((50, 3)).cumsum(axis=0))
    dates = np.datetime64("2020-01-01") + np.arange(50)
    p = TimeSeriesPanel(dates, v, tuple(SeriesMeta(s) for s in "abc"))
    r = log_returns(p)
    assert r.values.shape == (49, 3)
    assert np.array_equal(r.values, np.log(v[1:]) - np.log(v[:-1]))
    np.testing.assert_array_equal(r.dates, dates[1:])


def test_gbm_mean_return_matches_drift():
    # log of a GBM has iid normal increments with mean mu - sigma^2 / 2
    mu, sigma, dt, n_paths, n = 0.08, 0.2, 1 / 252, 10_000, 50
    rng = np.random.default_rng(2024)
    inc = (mu - 0.5 * sigma**2) * dt + sigma * np.sqrt(dt) * rng.standard_normal((n, n_paths))
    prices = 100 * np.exp(np.vstack([np.zeros(n_paths), inc.cumsum(axis=0)]))
    dates = np.datetime64("2020-01-01") + np.arange(n + 1)
    p = TimeSeriesPanel(dates, prices, tuple(SeriesMeta(f"s{i}") for i in range(n_paths)))
    m = log_returns(p).values.mean()
    se = sigma * np.sqrt(dt) / np.sqrt(n * n_paths)
    assert abs(m - (mu - 0.5 * sigma**2) * dt) < 4 * se


@given(st.lists(st.floats(-0.2, 0.2), min_size=2, max_size=60))
def test_round_trip_levels(steps):
    v = 50 * np.exp(np.concatenate([[0.0], np.cumsum(steps)]))
    dates = np.datetime64("2000-01-01") + np.arange(len(v))
    p = TimeSeriesPanel(dates, v[:, None], (SeriesMeta("x"),))
    r = log_returns(p)
    rebuilt = v[0] * np.exp(np.concatenate([[0.0], np.cumsum(r.values[:, 0])]))
    assert np.max(np.abs(rebuilt / v - 1)) < 1e-12


def test_panel_invariants():
    d = np.array(["2020-01-02", "2020-01-01"], dtype="datetime64[D]")
    with pytest.raises(PanelError, match="increasing"):
        TimeSeriesPanel(d, [[1.0], [2.0]], (SeriesMeta("a"),))
    d = np.array(["2020-01-01", "2020-01-02"], dtype="datetime64[D]")
    with pytest.raises(PanelError, match="non-finite"):
        TimeSeriesPanel(d, [[1.0], [np.nan]], (SeriesMeta("a"),))
    with pytest.raises(PanelError, match="duplicate"):
        TimeSeriesPanel(d, [[1.0, 1.0], [2.0, 2.0]], (SeriesMeta("a"), SeriesMeta("a")))
    with pytest.raises(PanelError, match="at least 2"):
        TimeSeriesPanel(d[:1], [[1.0]], (SeriesMeta("a"),))
    p = TimeSeriesPanel(d, [[1.0], [2.0]], (SeriesMeta("a"),))
    with pytest.raises(ValueError):
        p.values[0, 0] = 3.0


def test_split_lengths():
    r = ReturnsPanel.from_array(np.zeros((100, 2)))
    s = split_at(r, r.dates[60])
    assert (len(s.before), len(s.after)) == (60, 40)
    assert np.all(s.before.dates < s.split_date) and s.after.dates[0] >= s.split_date


def test_split_errors():
    r = ReturnsPanel.from_array(np.zeros((100, 2)))
    with pytest.raises(PanelError, match="empty 'before' half"):
        split_at(r, r.dates[0])
    with pytest.raises(PanelError, match="outside"):
        split_at(r, r.dates[-1] + 5)
    with pytest.raises(PanelError, match="fewer than"):
        split_at(r, r.dates[5], min_length=10)


@given(st.integers(1, 99))
def test_split_partitions(k):
    r = ReturnsPanel.from_array(np.arange(200.0).reshape(100, 2))
    s = split_at(r, r.dates[k])
    assert len(s.before) + len(s.after) == len(r)
    np.testing.assert_array_equal(np.vstack([s.before.values, s.after.values]), r.values)


def test_wide_csv_round_trip(rng):
    r = ReturnsPanel.from_array(np.exp(rng.standard_normal((20, 3))), ids=["a", "b", "c"])
    buf = io.StringIO()
    write_wide_csv(r, buf)
    back = load_panel(buf.getvalue())
    np.testing.assert_allclose(back.values, r.values, rtol=1e-11)
    np.testing.assert_array_equal(back.dates, r.dates)
