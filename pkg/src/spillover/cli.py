"""Command-line front end: ``spillover <subcommand> --config FILE [overrides]``.

Configuration is an INI file; ``--set section.key=value`` and the dedicated
flags override it, and ``SPILLOVER_OUTPUT_DIR`` overrides the configured
output directory (flags still win). Exit codes: 0 ok, 1 computation error,
2 configuration error. Failures leave an ``error.json`` in the output
directory.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import traceback
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import report as rp
from .connectedness import dynamic_connectedness, gfevd, rolling_connectedness, summarize
from .diagnostics import adf_test, chow_test, cointegration_matrix, describe
from .hedging import (SOURCES, CovConfig, conditional_cov_series, default_pairs, event_comparison,
                      hedge_pair)
from .panel import ReturnsPanel, TimeSeriesPanel, load_panel, log_returns, read_meta, split_at
from .qvar import DEFAULT_QUANTILES, qvar_connectedness_grid
from .synth import prices_from_returns, scenario, simulate_var, spec_from_config
from .tvp import TvpConfig, fit_tvp_var
from .var import (fit_var, residual_correlations, return_correlations, select_lag_bic,
                  stability_check)

EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG = 0, 1, 2
ENV_OUTPUT = "SPILLOVER_OUTPUT_DIR"
STAGES = ("describe", "test", "var", "tvp", "qvar", "rolling", "hedge")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunConfig:
    # input: either a price file or a synthetic scenario
    prices: Path | None = None
    schema: str = "wide"
    meta: Path | None = None
    scenario: str | None = None
    scenario_file: Path | None = None
    T: int = 1000
    # model
    lag: int | str = 1
    p_max: int = 5
    horizon: int = 10
    fevd: str = "generalized"
    correlation: str = "residual"
    # tvp
    kappa1: float = 0.99
    kappa2: float = 0.96
    prior_scale: float = 0.1
    burn_in: int = 20
    init_window: int | None = None
    # qvar
    quantiles: tuple = DEFAULT_QUANTILES
    qvar_window: int | None = 200
    qvar_step: int = 1
    qvar_cov: str = "residual"
    # rolling
    windows: tuple = (60, 120, 180, 360)
    # event split / hedging
    split_date: str | None = None
    source: str = "tvp_residual"
    decay: float = 0.94
    cov_window: int = 120
    denominator: str = "long"
    pairs: tuple | None = None
    # tests
    level: float = 0.05
    lb_lags: int = 20
    adf_max_lag: int | None = None
    adf_lag_rule: str = "info_criterion"
    coint_on: str = "levels"
    chow_reps: int = 199
    # output
    output_dir: Path = Path("spillover-out")
    bold_threshold: float = 5.0
    svg: bool = True
    seed: int = 0


# (section, key) -> (attribute, parser name)
_KEYS = {
    ("input", "prices"): ("prices", "path"),
    ("input", "schema"): ("schema", "str"),
    ("input", "meta"): ("meta", "path"),
    ("input", "scenario"): ("scenario", "str"),
    ("input", "scenario_file"): ("scenario_file", "path"),
    ("input", "t"): ("T", "int"),
    ("model", "lag"): ("lag", "lag"),
    ("model", "p_max"): ("p_max", "int"),
    ("model", "horizon"): ("horizon", "int"),
    ("model", "fevd"): ("fevd", "str"),
    ("model", "correlation"): ("correlation", "str"),
    ("tvp", "kappa1"): ("kappa1", "float"),
    ("tvp", "kappa2"): ("kappa2", "float"),
    ("tvp", "prior_scale"): ("prior_scale", "float"),
    ("tvp", "burn_in"): ("burn_in", "int"),
    ("tvp", "init_window"): ("init_window", "optint"),
    ("qvar", "quantiles"): ("quantiles", "floats"),
    ("qvar", "window"): ("qvar_window", "optint"),
    ("qvar", "step"): ("qvar_step", "int"),
    ("qvar", "cov"): ("qvar_cov", "str"),
    ("rolling", "windows"): ("windows", "ints"),
    ("event", "split_date"): ("split_date", "optstr"),
    ("hedge", "source"): ("source", "str"),
    ("hedge", "decay"): ("decay", "float"),
    ("hedge", "window"): ("cov_window", "int"),
    ("hedge", "denominator"): ("denominator", "str"),
    ("hedge", "pairs"): ("pairs", "pairs"),
    ("tests", "level"): ("level", "float"),
    ("tests", "lb_lags"): ("lb_lags", "int"),
    ("tests", "adf_max_lag"): ("adf_max_lag", "optint"),
    ("tests", "adf_lag_rule"): ("adf_lag_rule", "str"),
    ("tests", "coint_on"): ("coint_on", "str"),
    ("tests", "chow_reps"): ("chow_reps", "int"),
    ("output", "dir"): ("output_dir", "outpath"),
    ("output", "bold_threshold"): ("bold_threshold", "float"),
    ("output", "svg"): ("svg", "bool"),
    ("run", "seed"): ("seed", "int"),
}


def _parse(kind: str, text: str, base: Path):
    text = text.strip()
    if kind == "str":
        return text
    if kind == "optstr":
        return text or None
    if kind == "path":
        return (base / text) if text else None
    if kind == "outpath":
        if not text:
            raise ValueError("output directory must not be empty")
        return Path(text)
    if kind == "int":
        return int(text)
    if kind == "optint":
        return None if text.lower() in ("", "none", "full") else int(text)
    if kind == "float":
        return float(text)
    if kind == "bool":
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind == "lag":
        return "bic" if text.lower() == "bic" else int(text)
    if kind == "floats":
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    if kind == "ints":
        return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())
    if kind == "pairs":
        out = []
        for item in text.replace(";", ",").split(","):
            if item.strip():
                a, sep, b = item.partition(":")
                if not sep or not a.strip() or not b.strip():
                    raise ValueError(f"pair {item.strip()!r} is not LONG:SHORT")
                out.append((a.strip(), b.strip()))
        return tuple(out) or None
    raise AssertionError(kind)


def load_config(path: str | None, overrides: list[str] = (), env: dict | None = None,
                flag_values: dict | None = None) -> RunConfig:
    """Read, override and validate a run configuration.

    Every problem found is collected and raised together as :class:`ConfigError`.
    """
    env = os.environ if env is None else env
    errors: list[str] = []
    cp = configparser.ConfigParser()
    if path is None:
        text = resources.files("spillover").joinpath("data/report.ini").read_text("utf-8")
        cp.read_string(text)
        base = Path(str(resources.files("spillover").joinpath("data")))
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError([f"config file {path} does not exist"])
        try:
            cp.read(p, encoding="utf-8")
        except configparser.Error as exc:
            raise ConfigError([f"cannot parse config: {exc}"]) from None
        base = p.resolve().parent

    raw: dict[tuple, tuple[str, Path]] = {}
    for sec in cp.sections():
        for key, val in cp[sec].items():
            raw[(sec.lower(), key.lower())] = (val, base)
    if env.get(ENV_OUTPUT):
        raw[("output", "dir")] = (env[ENV_OUTPUT], Path.cwd())
    for item in overrides or ():
        k, sep, v = item.partition("=")
        sec, dot, key = k.strip().partition(".")
        if not sep or not dot:
            errors.append(f"override {item!r} is not section.key=value")
            continue
        raw[(sec.lower(), key.lower())] = (v, Path.cwd())
    for k, v in (flag_values or {}).items():
        if v is not None:
            raw[k] = (str(v), Path.cwd())

    cfg = RunConfig()
    for (sec, key), (val, b) in sorted(raw.items()):
        spec = _KEYS.get((sec, key))
        if spec is None:
            errors.append(f"unknown setting [{sec}] {key}")
            continue
        attr, kind = spec
        try:
            setattr(cfg, attr, _parse(kind, val, b))
        except ValueError as exc:
            errors.append(f"[{sec}] {key}: {exc}")
    errors += validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def validate(cfg: RunConfig) -> list[str]:
    e = []
    sources = [x for x in (cfg.prices, cfg.scenario, cfg.scenario_file) if x is not None]
    if len(sources) != 1:
        e.append("[input] needs exactly one of prices, scenario, scenario_file")
    for name in ("prices", "meta", "scenario_file"):
        v = getattr(cfg, name)
        if v is not None and not Path(v).is_file():
            e.append(f"[input] {name}: file {v} does not exist")
    if cfg.schema not in ("wide", "long"):
        e.append(f"[input] schema must be wide or long, got {cfg.schema!r}")
    if cfg.T < 10:
        e.append(f"[input] T must be >= 10, got {cfg.T}")
    if cfg.lag != "bic" and not (isinstance(cfg.lag, int) and cfg.lag >= 1):
        e.append(f"[model] lag must be a positive integer or 'bic', got {cfg.lag!r}")
    if cfg.p_max < 1:
        e.append(f"[model] p_max must be >= 1, got {cfg.p_max}")
    if cfg.horizon < 1:
        e.append(f"[model] horizon must be >= 1, got {cfg.horizon}")
    if cfg.fevd not in ("generalized", "orthogonal"):
        e.append(f"[model] fevd must be generalized or orthogonal, got {cfg.fevd!r}")
    if cfg.correlation not in ("residual", "returns"):
        e.append(f"[model] correlation must be residual or returns, got {cfg.correlation!r}")
    for name in ("kappa1", "kappa2"):
        v = getattr(cfg, name)
        if not 0 < v <= 1:
            e.append(f"[tvp] {name} must lie in (0, 1], got {v}")
    if not cfg.prior_scale > 0:
        e.append(f"[tvp] prior_scale must be positive, got {cfg.prior_scale}")
    if cfg.burn_in < 0:
        e.append(f"[tvp] burn_in must be >= 0, got {cfg.burn_in}")
    if cfg.init_window is not None and cfg.init_window < 2:
        e.append(f"[tvp] init_window must be >= 2, got {cfg.init_window}")
    q = cfg.quantiles
    if not q:
        e.append("[qvar] quantiles must not be empty")
    elif any(not 0 < v < 1 for v in q):
        e.append(f"[qvar] quantiles must lie in (0, 1), got {list(q)}")
    elif any(b <= a for a, b in zip(q, q[1:])):
        e.append(f"[qvar] quantiles must be strictly increasing, got {list(q)}")
    if cfg.qvar_window is not None and cfg.qvar_window < 3:
        e.append(f"[qvar] window must be >= 3, got {cfg.qvar_window}")
    if cfg.qvar_step < 1:
        e.append(f"[qvar] step must be >= 1, got {cfg.qvar_step}")
    if cfg.qvar_cov not in ("residual", "ols"):
        e.append(f"[qvar] cov must be residual or ols, got {cfg.qvar_cov!r}")
    w = cfg.windows
    if not w:
        e.append("[rolling] windows must not be empty")
    elif any(v < 3 for v in w):
        e.append(f"[rolling] windows must be >= 3, got {list(w)}")
    elif any(b <= a for a, b in zip(w, w[1:])):
        e.append(f"[rolling] windows must be sorted ascending without repeats, got {list(w)}")
    if cfg.split_date is not None:
        try:
            np.datetime64(cfg.split_date, "D")
        except ValueError:
            e.append(f"[event] split_date {cfg.split_date!r} is not an ISO date")
    if cfg.source not in SOURCES:
        e.append(f"[hedge] source must be one of {list(SOURCES)}, got {cfg.source!r}")
    if not 0 < cfg.decay <= 1:
        e.append(f"[hedge] decay must lie in (0, 1], got {cfg.decay}")
    if cfg.cov_window < 2:
        e.append(f"[hedge] window must be >= 2, got {cfg.cov_window}")
    if cfg.denominator not in ("long", "short"):
        e.append(f"[hedge] denominator must be long or short, got {cfg.denominator!r}")
    if not 0 < cfg.level < 1:
        e.append(f"[tests] level must lie in (0, 1), got {cfg.level}")
    if cfg.lb_lags < 1:
        e.append(f"[tests] lb_lags must be >= 1, got {cfg.lb_lags}")
    if cfg.adf_max_lag is not None and cfg.adf_max_lag < 0:
        e.append(f"[tests] adf_max_lag must be >= 0, got {cfg.adf_max_lag}")
    if cfg.adf_lag_rule not in ("info_criterion", "fixed"):
        e.append(f"[tests] adf_lag_rule must be info_criterion or fixed, got {cfg.adf_lag_rule!r}")
    if cfg.coint_on not in ("levels", "returns"):
        e.append(f"[tests] coint_on must be levels or returns, got {cfg.coint_on!r}")
    if cfg.chow_reps < 19:
        e.append(f"[tests] chow_reps must be >= 19, got {cfg.chow_reps}")
    if cfg.bold_threshold < 0:
        e.append(f"[output] bold_threshold must be >= 0, got {cfg.bold_threshold}")
    if cfg.seed < 0:
        e.append(f"[run] seed must be >= 0, got {cfg.seed}")
    return e


# data ---------------------------------------------------------------------------

@dataclass
class RunData:
    levels: TimeSeriesPanel
    returns: ReturnsPanel


def load_data(cfg: RunConfig) -> RunData:
    if cfg.prices is not None:
        meta = None
        if cfg.meta is not None:
            with open(cfg.meta, encoding="utf-8") as fh:
                meta = read_meta(fh)
        with open(cfg.prices, encoding="utf-8") as fh:
            levels = load_panel(fh, cfg.schema, meta)
        return RunData(levels, log_returns(levels))
    spec = (spec_from_config(str(cfg.scenario_file)) if cfg.scenario_file is not None
            else scenario(cfg.scenario, cfg.T, cfg.seed))
    returns = simulate_var(spec)
    prices = prices_from_returns(returns)
    dates = np.concatenate([[returns.dates[0] - 1], returns.dates])
    return RunData(TimeSeriesPanel(dates, prices, returns.meta), returns)


# stages -------------------------------------------------------------------------

class Context:
    """Shared state for one run so stages reuse upstream fits."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.data = load_data(cfg)
        self._lag = None
        self._tvp = None

    @property
    def returns(self) -> ReturnsPanel:
        return self.data.returns

    @property
    def lag(self) -> int:
        if self._lag is None:
            c = self.cfg
            self._lag = select_lag_bic(self.returns, c.p_max) if c.lag == "bic" else c.lag
        return self._lag

    def tvp_config(self) -> TvpConfig:
        c = self.cfg
        return TvpConfig(self.lag, c.kappa1, c.kappa2, c.prior_scale, c.burn_in, c.init_window)

    @property
    def tvp(self):
        if self._tvp is None:
            self._tvp = fit_tvp_var(self.returns, self.tvp_config())
        return self._tvp

    def split(self):
        d = self.cfg.split_date
        if d is None:
            d = self.returns.dates[len(self.returns) // 2]
        return split_at(self.returns, d)


def cmd_describe(ctx: Context) -> list[Path]:
    rows = describe(ctx.returns, ctx.cfg.lb_lags)
    return [rp.write_csv(ctx.out / "describe" / "table05_descriptive.csv", rp.descriptive_rows(rows),
                         "Table 5 analog: descriptive statistics of returns")]


def cmd_test(ctx: Context) -> list[Path]:
    c, r = ctx.cfg, ctx.returns
    d = ctx.out / "test"
    adf = [adf_test(r.column(i), c.adf_max_lag, c.adf_lag_rule, c.level) for i in r.ids]
    files = [rp.write_csv(d / "table06_adf.csv", rp.adf_rows(r.ids, adf),
                          "Table 6 analog: ADF unit-root test on returns")]
    bp, ss = chow_test(r, ctx.split(), ctx.lag, c.chow_reps, c.seed, c.level)
    files.append(rp.write_csv(d / "table09_chow.csv", rp.chow_rows(bp, ss),
                              "Table 9 analog: Chow stability tests of the VAR"))
    panel = ctx.data.levels if c.coint_on == "levels" else r
    cm = cointegration_matrix(panel, c.level, c.adf_max_lag, c.adf_lag_rule)
    files.append(rp.write_csv(d / "table10_cointegration.csv", rp.cointegration_rows(cm),
                              f"Table 10 analog: Engle-Granger statistics on {c.coint_on}"))
    files.append(rp.write_csv(d / "table10_hypotheses.csv", rp.hypothesis_rows(cm),
                              "Table 10 analog: role-pair cointegration hypotheses H1-H6"))
    return files


def cmd_var(ctx: Context) -> list[Path]:
    c, r = ctx.cfg, ctx.returns
    d = ctx.out / "var"
    model = fit_var(r, ctx.lag)
    corr = residual_correlations(model) if c.correlation == "residual" else return_correlations(r)
    files = [
        rp.write_csv(d / "table07_conditional_correlation.csv",
                     rp.correlation_rows(corr.conditional, r.ids),
                     f"Table 7 analog: conditional correlation ({c.correlation})"),
        rp.write_csv(d / "table08_partial_correlation.csv", rp.correlation_rows(corr.partial, r.ids),
                     f"Table 8 analog: partial correlation ({c.correlation})"),
    ]
    s = summarize(gfevd(model, h=c.horizon, kind=c.fevd))
    files.append(rp.write_csv(d / "table11_static_connectedness.csv", rp.connectedness_rows(s),
                              f"Table 11 analog: static VAR({ctx.lag}) connectedness, h={c.horizon}"))
    files += rp.write_network(d, "network_static", s, c.bold_threshold, c.horizon, "static")
    split = ctx.split()
    for name, half in (("before", split.before), ("after", split.after)):
        sh = summarize(gfevd(fit_var(half, ctx.lag), h=c.horizon, kind=c.fevd))
        files += rp.write_network(d, f"network_{name}", sh, c.bold_threshold, c.horizon,
                                  f"{name} {split.split_date}")
    files.append(rp.write_json(d / "model.json", {
        "lag": int(ctx.lag), "horizon": c.horizon, "nobs": model.nobs,
        "spectral_radius": rp._jnum(stability_check(model)),
    }))
    return files


def cmd_tvp(ctx: Context) -> list[Path]:
    c = ctx.cfg
    d = ctx.out / "tvp"
    path = ctx.tvp
    ds = dynamic_connectedness(path, c.horizon, kind=c.fevd)
    avg = ds.average()
    files = [
        rp.write_csv(d / "table12_tvp_connectedness.csv", rp.connectedness_rows(avg),
                     f"Table 12 analog: TVP-VAR connectedness (time average), h={c.horizon}"),
        rp.write_csv(d / "tvp_dynamic.csv", rp.dynamic_rows(ds),
                     "Figures 5-7 analog: dynamic TCI, NET, receiver and giver"),
        rp.write_csv(d / "tvp_path.csv", rp.tvp_path_rows(path),
                     "TVP-VAR filtered coefficients and covariances"),
    ]
    files += rp.write_network(d, "network_tvp", avg, c.bold_threshold, c.horizon, "tvp average")
    return files


def cmd_qvar(ctx: Context) -> list[Path]:
    c = ctx.cfg
    d = ctx.out / "qvar"
    res = qvar_connectedness_grid(ctx.returns, c.quantiles, c.qvar_window, ctx.lag, c.horizon,
                                  c.qvar_step, c.qvar_cov)
    files = [rp.write_csv(d / "heatmap_tci.csv", rp.heatmap_rows(res.tci, res.quantiles, res.dates),
                          "Figure 9 analog: TCI by quantile and date")]
    for k, sid in enumerate(res.ids):
        files.append(rp.write_csv(d / f"heatmap_net_{sid}.csv",
                                  rp.heatmap_rows(res.net[:, :, k], res.quantiles, res.dates),
                                  f"Figure 9 analog: NET of {sid} by quantile and date"))
    files.append(rp.write_json(d / "heatmaps.json", rp.heatmap_json(res)))
    if c.svg:
        files.append(rp.atomic_write(d / "heatmap_tci.svg",
                                     rp.heatmap_svg(res.tci, res.quantiles, "TCI", center=None)))
        for k, sid in enumerate(res.ids):
            files.append(rp.atomic_write(d / f"heatmap_net_{sid}.svg",
                                         rp.heatmap_svg(res.net[:, :, k], res.quantiles, f"NET {sid}")))
    return files


def cmd_rolling(ctx: Context) -> list[Path]:
    c = ctx.cfg
    d = ctx.out / "rolling"
    series = {w: rolling_connectedness(ctx.returns, w, ctx.lag, c.horizon, c.fevd) for w in c.windows}
    files = [rp.write_csv(d / "table13_rolling_net.csv", rp.rolling_net_rows(series),
                          "Table 13 analog: mean NET across rolling windows")]
    for w, ds in series.items():
        files.append(rp.write_csv(d / f"rolling_w{w:03d}.csv", rp.dynamic_rows(ds),
                                  f"Figure 15 analog: rolling-window ({w}) connectedness"))
        files += rp.write_network(d, f"network_rolling_w{w:03d}", ds.average(), c.bold_threshold,
                                  c.horizon, f"rolling {w}")
    return files


def _pairs(ctx: Context):
    c = ctx.cfg
    if c.pairs is not None:
        for a, b in c.pairs:
            for sid in (a, b):
                if sid not in ctx.returns.ids:
                    raise KeyError(f"hedge pair references unknown series {sid!r}")
        return list(c.pairs), len(c.pairs)
    pairs = default_pairs(ctx.returns.meta)
    return pairs, len(pairs) // 2


def cmd_hedge(ctx: Context) -> list[Path]:
    c = ctx.cfg
    d = ctx.out / "hedge"
    pairs, n_left = _pairs(ctx)
    cov_cfg = CovConfig(c.source, c.decay, c.cov_window, ctx.tvp_config())
    cov = conditional_cov_series(ctx.returns, cov_cfg, ctx.tvp if c.source == "tvp_residual" else None)
    full = [hedge_pair(a, b, cov, c.denominator) for a, b in pairs]
    files = [rp.write_csv(d / "table14_hedging.csv", rp.hedge_table_rows(full, n_left),
                          f"Table 14 analog: mean hedge ratio and hedging effectiveness "
                          f"({c.source}, {c.denominator}-leg denominator)")]
    split = event_comparison(ctx.returns, pairs, ctx.split(), cov_cfg, c.denominator)
    files.append(rp.write_csv(d / "table15_event_hedging.csv", rp.hedge_split_rows(split, n_left),
                              f"Table 15 analog: hedging before and after {split.split_date}"))
    return files


COMMANDS = {"describe": cmd_describe, "test": cmd_test, "var": cmd_var, "tvp": cmd_tvp,
            "qvar": cmd_qvar, "rolling": cmd_rolling, "hedge": cmd_hedge}


def run(stages, cfg: RunConfig) -> list[Path]:
    ctx = Context(cfg)
    files = []
    for s in stages:
        files += COMMANDS[s](ctx)
    rp.write_json(ctx.out / "manifest.json", {"files": rp.manifest(ctx.out)})
    return files


def cmd_report(cfg: RunConfig) -> list[Path]:
    return run(STAGES, cfg)


# entry point --------------------------------------------------------------------

def _write_error(outdir, payload: dict) -> None:
    try:
        rp.write_json(Path(outdir) / "error.json", payload)
    except OSError as exc:
        print(f"could not write error.json: {exc}", file=sys.stderr)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spillover", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in STAGES + ("report",):
        sp = sub.add_parser(name, help=f"run the {name} stage" if name != "report" else "run every stage")
        sp.add_argument("--config", help="INI run configuration (default: bundled synthetic scenario)")
        sp.add_argument("--output-dir", help="output directory")
        sp.add_argument("--seed", type=str)
        sp.add_argument("--lag", type=str, help="VAR lag or 'bic'")
        sp.add_argument("--horizon", type=str)
        sp.add_argument("--kappa1", type=str)
        sp.add_argument("--kappa2", type=str)
        sp.add_argument("--windows", type=str, help="comma-separated rolling windows")
        sp.add_argument("--split-date", type=str)
        sp.add_argument("--source", type=str, help="conditional covariance source for hedging")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    sp = sub.add_parser("simulate", help="write a synthetic price panel")
    sp.add_argument("--scenario", default="supply_chain")
    sp.add_argument("--scenario-file")
    sp.add_argument("--T", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="wide CSV of prices")
    sp.add_argument("--meta-out", help="metadata sidecar")
    return ap


_FLAGS = {"output_dir": ("output", "dir"), "seed": ("run", "seed"), "lag": ("model", "lag"),
          "horizon": ("model", "horizon"), "kappa1": ("tvp", "kappa1"), "kappa2": ("tvp", "kappa2"),
          "windows": ("rolling", "windows"), "split_date": ("event", "split_date"),
          "source": ("hedge", "source")}


def _simulate(args) -> int:
    try:
        spec = (spec_from_config(args.scenario_file) if args.scenario_file
                else scenario(args.scenario, args.T, args.seed))
        ret = simulate_var(spec)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    prices = prices_from_returns(ret)
    dates = np.concatenate([[ret.dates[0] - 1], ret.dates])
    rows = [["date"] + ret.ids] + [[str(d)] + ["{:.10g}".format(v) for v in row]
                                    for d, row in zip(dates, prices)]
    rp.write_csv(args.out, rows)
    if args.meta_out:
        rp.write_csv(args.meta_out, [["id", "role", "esg_score", "difference"]] + [
            [m.id, m.role, "" if m.esg_score is None else m.esg_score, m.difference]
            for m in ret.meta])
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "simulate":
        return _simulate(args)
    flags = {_FLAGS[k]: getattr(args, k) for k in _FLAGS}
    try:
        cfg = load_config(args.config, args.set, flag_values=flags)
    except ConfigError as exc:
        out = args.output_dir or os.environ.get(ENV_OUTPUT) or "spillover-out"
        _write_error(out, {"status": "config_error", "errors": exc.errors})
        for msg in exc.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    stages = STAGES if args.command == "report" else (args.command,)
    try:
        files = run(stages, cfg)
    except Exception as exc:  # any stage failure maps to exit 1
        _write_error(cfg.output_dir, {"status": "error", "command": args.command,
                                      "type": type(exc).__name__, "message": str(exc),
                                      "trace": traceback.format_exception_only(type(exc), exc)})
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    err = Path(cfg.output_dir) / "error.json"
    if err.exists():
        err.unlink()
    print(json.dumps({"status": "ok", "files": len(files), "output_dir": str(cfg.output_dir)}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
