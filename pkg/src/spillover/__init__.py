"""Connectedness and hedging analytics for multi-series return panels.

Submodules: ``panel`` (loading and differencing), ``diagnostics`` (normality,
unit-root, cointegration and stability tests), ``var`` and ``tvp`` (constant
and time-varying VAR estimation), ``connectedness`` (generalized FEVD and
spillover indices), ``qvar`` (quantile VAR), ``hedging`` (hedge ratios and
effectiveness), ``synth`` (synthetic generators and Monte-Carlo oracles) and
``report``/``cli`` (artifact emitters and the command-line front end).
"""

from .connectedness import (ConnectednessSummary, DynamicSeries, FevdTable, NpdcMatrix,
                            dynamic_connectedness, gfevd, npdc, rolling_connectedness,
                            static_connectedness, summarize)
from .diagnostics import (CointegrationMatrix, DescriptiveRow, TestResult, adf_test, chow_test,
                          cointegration_matrix, describe, engle_granger_pair, jarque_bera,
                          ljung_box_sq)
from .hedging import (CondCovSeries, CovConfig, HedgePair, HedgeReportSplit,
                      conditional_cov_series, event_comparison, hedge_pair, hedge_ratio_mv)
from .panel import (EventSplit, ReturnsPanel, SeriesMeta, TimeSeriesPanel, load_panel,
                    log_returns, split_at)
from .qvar import QvarGridResult, fit_quantile_var, qvar_connectedness_grid
from .synth import SynthSpec, mc_fevd_oracle, scenario, simulate_var
from .tvp import TvpConfig, TvpPath, fit_tvp_var, path_slice
from .var import (CorrelationPair, VarModel, fit_var, residual_correlations, select_lag_bic,
                  stability_check)

__version__ = "0.1.0"
