"""File emitters: table CSVs, network DOT/JSON, heatmap grids and path dumps.

Everything written here is deterministic for identical inputs: floats use
fixed formats, JSON keys are sorted, and nothing records wall-clock time.
Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .connectedness import ConnectednessSummary, DynamicSeries

FLOAT_FMT = "{:.6f}"

NETWORK_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "connectedness network",
    "type": "object",
    "required": ["label", "horizon", "threshold", "tci", "nodes", "edges"],
    "properties": {
        "label": {"type": "string"},
        "horizon": {"type": "integer", "minimum": 1},
        "threshold": {"type": "number", "minimum": 0},
        "tci": {"type": "number", "minimum": 0, "maximum": 100},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "net", "class", "size", "receiver", "giver"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "net": {"type": "number"},
                    "class": {"enum": ["giver", "receiver", "balanced"]},
                    "size": {"type": "number", "minimum": 0},
                    "receiver": {"type": "number"},
                    "giver": {"type": "number"},
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["source", "target", "weight", "bold"],
                "properties": {
                    "source": {"type": "string"},
                    "target": {"type": "string"},
                    "weight": {"type": "number", "exclusiveMinimum": 0},
                    "bold": {"type": "boolean"},
                },
            },
        },
    },
}

HEATMAP_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "quantile heatmaps",
    "type": "object",
    "required": ["quantiles", "dates", "window", "horizon", "grids"],
    "properties": {
        "quantiles": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0,
                                                 "exclusiveMaximum": 1}},
        "dates": {"type": "array", "items": {"type": "string"}},
        "window": {"type": "integer"},
        "horizon": {"type": "integer"},
        "grids": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "number"}},
            },
        },
    },
}


def fnum(x) -> str:
    """Fixed six-decimal rendering; NaN becomes an empty cell."""
    if x is None:
        return ""
    x = float(x)
    if not np.isfinite(x):
        return ""
    s = FLOAT_FMT.format(x)
    return "0.000000" if s == "-0.000000" else s


def _jnum(x) -> float:
    x = round(float(x), 10)
    return 0.0 if x == 0 else x


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv(rows, title: str | None = None) -> str:
    buf = io.StringIO()
    if title:
        buf.write(f"# {title}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def write_csv(path, rows, title: str | None = None) -> Path:
    return atomic_write(path, _csv(rows, title))


def write_json(path, obj) -> Path:
    return atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


# tables ---------------------------------------------------------------------

def descriptive_rows(rows) -> list:
    from .diagnostics import significance_stars
    out = [["id", "mean", "median", "sd", "skewness", "kurtosis", "jb_stat", "jb_p", "jb_sig",
            "q2_stat", "q2_p", "q2_sig"]]
    for r in rows:
        out.append([r.id, fnum(r.mean), fnum(r.median), fnum(r.sd), fnum(r.skewness),
                    fnum(r.kurtosis), fnum(r.jb_stat), _pfmt(r.jb_p), significance_stars(r.jb_p),
                    fnum(r.q2_stat), _pfmt(r.q2_p), significance_stars(r.q2_p)])
    return out


def _pfmt(p: float) -> str:
    return "{:.6g}".format(p) if p < 1e-6 else fnum(p)


def adf_rows(ids, results) -> list:
    from .diagnostics import significance_stars
    out = [["id", "statistic", "lag", "p_value", "sig", "decision"]]
    for sid, r in zip(ids, results):
        out.append([sid, fnum(r.statistic), r.lag, _pfmt(r.p_value), significance_stars(r.p_value),
                    r.decision])
    return out


def correlation_rows(matrix: np.ndarray, ids) -> list:
    """Upper triangle with unit diagonal, blanks below."""
    out = [[""] + list(ids)]
    n = len(ids)
    for i in range(n):
        out.append([ids[i]] + ["" if j < i else fnum(matrix[i, j]) for j in range(n)])
    return out


def chow_rows(bp, ss) -> list:
    from .diagnostics import significance_stars
    out = [["test", "statistic", "critical_value_95", "p_value", "sig", "decision"]]
    for name, r in (("Break-point Test", bp), ("Sample-split test", ss)):
        out.append([name, fnum(r.statistic), fnum(r.critical_value), _pfmt(r.p_value),
                    significance_stars(r.p_value), r.decision])
    return out


def cointegration_rows(cm) -> list:
    from .diagnostics import significance_stars
    ids = cm.ids
    out = [[""] + list(ids)]
    for i, a in enumerate(ids):
        row = [a]
        for j in range(len(ids)):
            c = cm.cells[i][j]
            row.append("" if c is None else fnum(c.statistic) + significance_stars(c.p_value))
        out.append(row)
    return out


def hypothesis_rows(cm) -> list:
    from .diagnostics import HYPOTHESES
    out = [["hypothesis", "role_a", "role_b", "supported"]]
    for name, (a, b) in HYPOTHESES.items():
        v = cm.hypotheses.get(name)
        out.append([name, a, b, "n/a" if v is None else str(bool(v)).lower()])
    return out


def connectedness_rows(s: ConnectednessSummary) -> list:
    """Square table with Receiver column and Giver / Inc.Own / NET / NPT rows."""
    ids = s.ids
    out = [[""] + list(ids) + ["Receiver"]]
    for i, a in enumerate(ids):
        out.append([a] + [fnum(v) for v in s.table[i]] + [fnum(s.receiver[i])])
    out.append(["Giver"] + [fnum(v) for v in s.giver] + [fnum(s.giver.sum())])
    out.append(["Inc.Own"] + [fnum(v) for v in s.inc_own] + ["TCI"])
    out.append(["NET"] + [fnum(v) for v in s.net] + [fnum(s.tci)])
    out.append(["NPT"] + [str(int(v)) for v in s.npt] + [""])
    return out


def rolling_net_rows(series: dict) -> list:
    """Time-averaged NET per window, one row per window."""
    ids = next(iter(series.values())).ids if series else []
    out = [["Rolling Windows"] + list(ids)]
    for w in sorted(series):
        out.append([str(w)] + [fnum(v) for v in series[w].net.mean(axis=0)])
    return out


def dynamic_rows(ds: DynamicSeries) -> list:
    ids = ds.ids
    out = [["date", "tci"] + [f"net_{i}" for i in ids] + [f"receiver_{i}" for i in ids]
           + [f"giver_{i}" for i in ids] + ["repaired"]]
    for k in range(len(ds)):
        out.append([str(ds.dates[k]), fnum(ds.tci[k])] + [fnum(v) for v in ds.net[k]]
                   + [fnum(v) for v in ds.receiver[k]] + [fnum(v) for v in ds.giver[k]]
                   + [str(int(ds.repaired[k]))])
    return out


def tvp_path_rows(path) -> list:
    """One row per date: stacked coefficients then the covariance entries."""
    ids, p = path.ids, path.config.lag
    regs = ["const"] + [f"{i}_L{j}" for j in range(1, p + 1) for i in ids]
    head = ["date"] + [f"phi[{e}|{r}]" for e in ids for r in regs]
    head += [f"S[{a}|{b}]" for a in ids for b in ids]
    out = [head]
    for t in range(len(path)):
        out.append([str(path.dates[t])] + [fnum(v) for v in path.coefs[t].T.ravel()]
                   + [fnum(v) for v in path.cov[t].ravel()])
    return out


def hedge_table_rows(pairs, n_left: int | None = None) -> list:
    """First ``n_left`` pairs (default half) on the left, the rest on the right."""
    left, right = _split_sides(pairs, n_left)
    out = [["Portfolio/Factor pairs", "HR", "HE", "Factor/Portfolio pairs", "HR", "HE"]]
    for k in range(max(len(left), len(right))):
        row = []
        for side in (left, right):
            if k < len(side):
                hp = side[k]
                row += [f"{hp.long_id}/{hp.short_id}", fnum(hp.hr_mean), fnum(hp.he)]
            else:
                row += ["", "", ""]
        out.append(row)
    return out


def hedge_split_rows(split, n_left: int | None = None) -> list:
    out = [["Portfolio/Factor pairs", "HR before", "HE before", "HR after", "HE after",
            "Factor/Portfolio pairs", "HR before", "HE before", "HR after", "HE after"]]
    bl, br = _split_sides(split.before, n_left)
    al, ar = _split_sides(split.after, n_left)
    for k in range(max(len(bl), len(br))):
        row = []
        for b, a in ((bl, al), (br, ar)):
            if k < len(b):
                row += [f"{b[k].long_id}/{b[k].short_id}", fnum(b[k].hr_mean), fnum(b[k].he),
                        fnum(a[k].hr_mean), fnum(a[k].he)]
            else:
                row += [""] * 5
        out.append(row)
    return out


def _split_sides(pairs, n_left=None):
    half = len(pairs) // 2 if n_left is None else n_left
    return list(pairs[:half]), list(pairs[half:])


# networks -------------------------------------------------------------------

def network(summary: ConnectednessSummary, threshold: float, horizon: int, label: str) -> dict:
    """Directed NPDC graph: edge ``i -> j`` iff ``l_ji - l_ij > 0``."""
    ids = summary.ids
    d = summary.npdc
    nodes = []
    for k, sid in enumerate(ids):
        net = float(summary.net[k])
        cls = "balanced" if abs(net) < 1e-12 else ("giver" if net > 0 else "receiver")
        nodes.append({"id": sid, "net": _jnum(net), "class": cls, "size": _jnum(abs(net)),
                      "receiver": _jnum(summary.receiver[k]), "giver": _jnum(summary.giver[k])})
    edges = []
    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            w = float(d[j, i])
            if i != j and w > 0:
                edges.append({"source": a, "target": b, "weight": _jnum(w), "bold": w > threshold})
    return {"label": label, "horizon": int(horizon), "threshold": _jnum(threshold),
            "tci": _jnum(summary.tci), "nodes": nodes, "edges": edges}


_NODE_COLOR = {"giver": "#3b75af", "receiver": "#f2c14e", "balanced": "#cccccc"}


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def network_dot(net: dict) -> str:
    top = max([n["size"] for n in net["nodes"]] + [1e-12])
    lines = [f"digraph {_q(net['label'])} {{",
             '  graph [label=' + _q(f"{net['label']} TCI={net['tci']:.2f}") + "];",
             "  node [shape=circle, style=filled, fontname=Helvetica];"]
    for n in net["nodes"]:
        width = 0.6 + 1.4 * n["size"] / top
        lines.append(f"  {_q(n['id'])} [class={n['class']}, fillcolor={_q(_NODE_COLOR[n['class']])}, "
                     f"width={width:.4f}, net={_q(fnum(n['net']))}];")
    for e in net["edges"]:
        style = "bold" if e["bold"] else "solid"
        pen = 3.0 if e["bold"] else 1.0
        lines.append(f"  {_q(e['source'])} -> {_q(e['target'])} [weight={_q(fnum(e['weight']))}, "
                     f"style={style}, penwidth={pen:.1f}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_network(outdir, stem: str, summary: ConnectednessSummary, threshold: float,
                  horizon: int, label: str) -> list[Path]:
    net = network(summary, threshold, horizon, label)
    return [atomic_write(Path(outdir) / f"{stem}.dot", network_dot(net)),
            write_json(Path(outdir) / f"{stem}.json", net)]


# heatmaps -------------------------------------------------------------------

def heatmap_rows(grid: np.ndarray, quantiles, dates) -> list:
    out = [["quantile"] + [str(d) for d in dates]]
    for q, row in zip(quantiles, grid):
        out.append([f"{q:.2f}"] + [fnum(v) for v in row])
    return out


def heatmap_json(result) -> dict:
    grids = {"TCI": [[_jnum(v) for v in row] for row in result.tci]}
    for k, sid in enumerate(result.ids):
        grids[f"NET_{sid}"] = [[_jnum(v) for v in row] for row in result.net[:, :, k]]
    return {"quantiles": [float(q) for q in result.quantiles],
            "dates": [str(d) for d in result.dates], "window": int(result.window),
            "horizon": int(result.horizon), "grids": grids}


_COLD, _MID, _WARM = (np.array([44, 123, 182]), np.array([247, 247, 247]), np.array([215, 25, 28]))


def _ramp(u: float) -> str:
    """Diverging colour for ``u`` in [-1, 1]: cold blue, white, warm red."""
    u = float(np.clip(u, -1.0, 1.0))
    c = _MID + (u * (_WARM - _MID) if u >= 0 else -u * (_COLD - _MID))
    return "#{:02x}{:02x}{:02x}".format(*np.rint(c).astype(int))


def heatmap_svg(grid: np.ndarray, quantiles, title: str, center: float | None = 0.0) -> str:
    """Self-contained SVG; rows are quantiles (highest on top), columns dates.

    With ``center=None`` the ramp is centred on the grid's midrange.
    """
    Q, D = grid.shape
    lo, hi = float(np.min(grid)), float(np.max(grid))
    c = 0.5 * (lo + hi) if center is None else center
    half = max(abs(hi - c), abs(lo - c), 1e-12)
    cw, ch, left, top = 4, 16, 48, 24
    W, H = left + cw * D + 8, top + ch * Q + 8
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
             f'viewBox="0 0 {W} {H}">',
             f'<text x="{left}" y="16" font-family="Helvetica" font-size="12">{title}</text>']
    for r in range(Q):
        qi = Q - 1 - r
        y = top + r * ch
        parts.append(f'<text x="4" y="{y + 12}" font-family="Helvetica" font-size="10">'
                     f'{quantiles[qi]:.2f}</text>')
        for k in range(D):
            parts.append(f'<rect x="{left + k * cw}" y="{y}" width="{cw}" height="{ch}" '
                         f'fill="{_ramp((grid[qi, k] - c) / half)}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# manifest -------------------------------------------------------------------

def manifest(root) -> dict:
    """Relative path -> sha256 for every file under ``root`` (sorted)."""
    root = Path(root)
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.name not in ("manifest.json", "error.json"):
            out[p.relative_to(root).as_posix()] = hashlib.sha256(p.read_bytes()).hexdigest()
    return out
