"""Date-aligned price panels, log returns and event splits.

Panels are immutable: the value arrays are flagged read-only on
construction and every transformation returns a new object.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, TextIO

import numpy as np
import pandas as pd

ROLES = ("portfolio", "investor_sentiment", "energy_market", "shipping_cost", "other")
DIFFERENCES = ("log", "simple")


class PanelError(ValueError):
    """Raised for malformed or inconsistent panel input."""


@dataclass(frozen=True)
class SeriesMeta:
    """Identity and role of one series.

    ``difference`` selects how the series is turned into returns: ``"log"``
    requires strictly positive levels, ``"simple"`` differences the levels
    directly (used for index-like series such as a fear gauge).
    """

    id: str
    role: str = "other"
    esg_score: float | None = None
    difference: str = "log"

    def __post_init__(self):
        if not self.id:
            raise PanelError("series id must be nonempty")
        if self.role not in ROLES:
            raise PanelError(f"unknown role {self.role!r} for series {self.id!r}")
        if self.esg_score is not None and not self.esg_score >= 0:
            raise PanelError(f"esg_score must be >= 0 for series {self.id!r}")
        if self.difference not in DIFFERENCES:
            raise PanelError(f"unknown difference rule {self.difference!r}")


def _as_dates(dates) -> np.ndarray:
    try:
        out = np.asarray(dates, dtype="datetime64[D]")
    except (ValueError, TypeError) as exc:
        raise PanelError(f"unparseable date: {exc}") from None
    return out


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _default_meta(n: int, ids: Sequence[str] | None) -> tuple[SeriesMeta, ...]:
    ids = list(ids) if ids is not None else [f"x{i + 1}" for i in range(n)]
    return tuple(SeriesMeta(i) for i in ids)


@dataclass(frozen=True)
class _Panel:
    dates: np.ndarray
    values: np.ndarray
    meta: tuple[SeriesMeta, ...]
    min_length: int = field(default=1, repr=False)

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        meta = tuple(self.meta)
        if values.ndim != 2:
            raise PanelError("values must be a 2-d array")
        if len(dates) != values.shape[0]:
            raise PanelError(f"{len(dates)} dates for {values.shape[0]} rows")
        if len(meta) != values.shape[1]:
            raise PanelError(f"{len(meta)} meta entries for {values.shape[1]} columns")
        ids = [m.id for m in meta]
        if len(set(ids)) != len(ids):
            raise PanelError(f"duplicate series ids: {ids}")
        if len(dates) < self.min_length:
            raise PanelError(f"panel needs at least {self.min_length} rows, got {len(dates)}")
        if len(dates) > 1 and not np.all(dates[1:] > dates[:-1]):
            raise PanelError("dates must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise PanelError("panel contains missing or non-finite values")
        object.__setattr__(self, "dates", _freeze(dates))
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "meta", meta)

    @property
    def ids(self) -> list[str]:
        return [m.id for m in self.meta]

    @property
    def n_series(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]

    def index(self, series_id: str) -> int:
        try:
            return self.ids.index(series_id)
        except ValueError:
            raise KeyError(f"no series {series_id!r} in panel") from None

    def column(self, series_id: str) -> np.ndarray:
        return self.values[:, self.index(series_id)]

    def rows(self, start: int | None = None, stop: int | None = None):
        """Contiguous row slice as a panel of the same type."""
        sl = slice(start, stop)
        return replace(self, dates=self.dates[sl], values=self.values[sl])

    def select(self, ids: Iterable[str]):
        """Column subset, in the order given."""
        idx = [self.index(i) for i in ids]
        return replace(self, values=self.values[:, idx], meta=tuple(self.meta[i] for i in idx))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(np.array(self.values), index=pd.DatetimeIndex(self.dates, name="date"),
                            columns=self.ids)


@dataclass(frozen=True)
class TimeSeriesPanel(_Panel):
    """Level (price) panel, ``T x N`` with ``T >= 2``."""

    min_length: int = field(default=2, repr=False)


@dataclass(frozen=True)
class ReturnsPanel(_Panel):
    """First differences of a level panel, one row per date after the first."""

    @classmethod
    def from_array(cls, values, ids: Sequence[str] | None = None, start: str = "2000-01-03",
                   meta: Sequence[SeriesMeta] | None = None) -> "ReturnsPanel":
        """Wrap a bare array, labelling rows with consecutive days."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        dates = np.datetime64(start, "D") + np.arange(values.shape[0])
        if meta is None:
            meta = _default_meta(values.shape[1], ids)
        return cls(dates, values, tuple(meta))


@dataclass(frozen=True)
class EventSplit:
    """Partition of a returns panel around ``split_date``."""

    split_date: np.datetime64
    before: ReturnsPanel
    after: ReturnsPanel


def read_meta(source: TextIO | str) -> list[SeriesMeta]:
    """Read a ``id,role,esg_score[,difference]`` sidecar."""
    df = pd.read_csv(_stream(source), dtype=str, keep_default_na=False)
    missing = {"id", "role"} - set(df.columns)
    if missing:
        raise PanelError(f"metadata sidecar lacks columns {sorted(missing)}")
    out = []
    for rec in df.to_dict("records"):
        esg = rec.get("esg_score", "")
        out.append(SeriesMeta(
            id=rec["id"].strip(),
            role=rec["role"].strip() or "other",
            esg_score=float(esg) if str(esg).strip() else None,
            difference=(rec.get("difference") or "log").strip(),
        ))
    return out


def _stream(source) -> TextIO:
    if isinstance(source, str):
        return io.StringIO(source)
    return source


def load_panel(source: TextIO | str, schema: str = "wide",
               meta: Sequence[SeriesMeta] | None = None) -> TimeSeriesPanel:
    """Parse comma-separated levels into a :class:`TimeSeriesPanel`.

    Parameters
    ----------
    source : text stream or str
        CSV text. ``wide`` has a ``date`` column followed by one column per
        series; ``long`` has ``date,id,value`` records.
    schema : {"wide", "long"}
    meta : sequence of SeriesMeta, optional
        Roles and difference rules. Series without an entry get defaults
        (role ``other``, log differences).

    Only dates observed for every series are kept. Row order in the input
    does not matter.
    """
    if schema not in ("wide", "long"):
        raise PanelError(f"unknown schema {schema!r}")
    try:
        df = pd.read_csv(_stream(source), dtype={"date": str, "id": str})
    except pd.errors.ParserError as exc:
        raise PanelError(f"cannot parse input: {exc}") from None
    if "date" not in df.columns:
        raise PanelError("input has no 'date' column")
    try:
        df["date"] = pd.to_datetime(df["date"].str.strip(), format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise PanelError(f"unparseable date: {exc}") from None

    if schema == "long":
        if not {"id", "value"} <= set(df.columns):
            raise PanelError("long schema needs date,id,value columns")
        df["id"] = df["id"].str.strip()
        dup = df.duplicated(["date", "id"])
        if dup.any():
            row = df.loc[dup].iloc[0]
            raise PanelError(f"duplicate observation for {row['id']!r} on {row['date'].date()}")
        wide = df.pivot(index="date", columns="id", values="value")
        wide = wide[list(dict.fromkeys(df["id"]))]
    else:
        if df["date"].duplicated().any():
            raise PanelError(f"duplicate observation on {df.loc[df['date'].duplicated(), 'date'].iloc[0].date()}")
        wide = df.set_index("date")
        wide.columns = [str(c).strip() for c in wide.columns]

    wide = wide.apply(pd.to_numeric, errors="coerce").sort_index().dropna(how="any")
    if wide.empty:
        raise PanelError("no date is observed for every series")

    by_id = {m.id: m for m in (meta or ())}
    meta_out = tuple(by_id.get(c, SeriesMeta(c)) for c in wide.columns)
    for m in meta_out:
        if m.difference == "log" and not (wide[m.id] > 0).all():
            raise PanelError(f"nonpositive price in series {m.id!r} flagged for log returns")
    return TimeSeriesPanel(wide.index.values.astype("datetime64[D]"), wide.to_numpy(float), meta_out)


def log_returns(panel: TimeSeriesPanel) -> ReturnsPanel:
    """Difference each series: ``ln(C_t) - ln(C_{t-1})`` or plain for ``simple`` series."""
    v = panel.values
    out = np.empty((len(panel) - 1, panel.n_series))
    for i, m in enumerate(panel.meta):
        if m.difference == "log":
            if np.any(v[:, i] <= 0):
                raise PanelError(f"nonpositive value in series {m.id!r}")
            lv = np.log(v[:, i])
            out[:, i] = lv[1:] - lv[:-1]
        else:
            out[:, i] = v[1:, i] - v[:-1, i]
    return ReturnsPanel(panel.dates[1:], out, panel.meta)


def split_at(returns: ReturnsPanel, date, min_length: int = 1) -> EventSplit:
    """Split into rows strictly before ``date`` and rows on/after it."""
    d = _as_dates([date])[0]
    if not returns.dates[0] <= d <= returns.dates[-1]:
        raise PanelError(f"split date {d} outside panel range {returns.dates[0]}..{returns.dates[-1]}")
    k = int(np.searchsorted(returns.dates, d, side="left"))
    for name, n in (("before", k), ("after", len(returns) - k)):
        if n == 0:
            raise PanelError(f"empty '{name}' half when splitting at {d}")
        if n < min_length:
            raise PanelError(f"'{name}' half has {n} rows, fewer than {min_length}")
    return EventSplit(d, returns.rows(0, k), returns.rows(k, None))


def write_wide_csv(panel: _Panel, fh: TextIO, fmt: str = "%.12g") -> None:
    """Write ``date,ID1,ID2,...`` rows."""
    fh.write("date," + ",".join(panel.ids) + "\n")
    for d, row in zip(panel.dates, panel.values):
        fh.write(str(d) + "," + ",".join(fmt % x for x in row) + "\n")
