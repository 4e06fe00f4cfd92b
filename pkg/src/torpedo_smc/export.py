"""CSV logs and fixed-layout SVG line plots.

Numbers are written with 17 significant digits so a round trip through
``float()`` is exact. SVG output depends only on the data, so identical
runs give byte-identical files.
"""

from __future__ import annotations

import json
import math
from typing import Sequence

import numpy as np


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(path, columns: Sequence[str], matrix: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in matrix:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [[float(v) for v in line.rstrip("\n").split(",")] for line in fh if line.strip()]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def log_csv(path, log) -> None:
    write_csv(path, log.columns(), log.as_matrix())


def comparison_matrix(logs, labels) -> tuple[list[str], np.ndarray]:
    """Horizontally merge logs on their shared time grid; columns get ``_<label>``."""
    cols = ["t"]
    parts = [logs[0].t[:, None]]
    for log, label in zip(logs, labels):
        cols += [f"{c}_{label}" for c in log.columns()[1:]]
        parts.append(log.as_matrix()[:, 1:])
    return cols, np.hstack(parts)


def metrics_table_text(rows) -> str:
    """Plain-text table of ``(label, MetricsReport)`` rows."""
    from .metrics import format_value

    if not rows:
        return ""
    fields = list(rows[0][1].to_dict())
    header = ["scenario"] + fields
    body = [[label] + [format_value(v) for v in m.to_dict().values()] for label, m in rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in body]
    return "\n".join(lines)


def metrics_json(rows) -> str:
    return json.dumps({label: m.to_dict() for label, m in rows}, indent=2, sort_keys=False)


# --- SVG ---------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
_W, _PANEL_H = 720, 220
_ML, _MR, _MT, _MB = 70, 150, 28, 32


def _envelope(t: np.ndarray, v: np.ndarray, buckets: int) -> tuple[np.ndarray, np.ndarray]:
    """Min/max per bucket so decimated chattering stays visible."""
    if v.size <= 2 * buckets:
        return t, v
    edges = np.linspace(0, v.size, buckets + 1).astype(int)
    tt, vv = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        seg = v[a:b]
        i, j = int(np.argmin(seg)), int(np.argmax(seg))
        for k in sorted({i, j}):
            tt.append(t[a + k])
            vv.append(seg[k])
    return np.array(tt), np.array(vv)


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _panel(t, series, title: str, y0: int) -> list[str]:
    pw = _W - _ML - _MR
    ph = _PANEL_H - _MT - _MB
    t0, t1 = float(t[0]), float(t[-1])
    vals = np.concatenate([np.asarray(v, dtype=float) for _, v in series])
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def sx(v):
        return _ML + (v - t0) / (t1 - t0 or 1.0) * pw

    def sy(v):
        return y0 + _MT + (hi - v) / (hi - lo) * ph

    out = [
        f'<text x="{_ML}" y="{y0 + 18}" font-size="13" font-weight="bold">{title}</text>',
        f'<rect x="{_ML}" y="{y0 + _MT}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for tick in _nice_ticks(lo, hi):
        yy = sy(tick)
        out.append(f'<line x1="{_ML - 4}" y1="{yy:.2f}" x2="{_ML}" y2="{yy:.2f}" stroke="#444"/>')
        out.append(f'<text x="{_ML - 6}" y="{yy + 4:.2f}" font-size="10" text-anchor="end">{tick:.4g}</text>')
    for tick in _nice_ticks(t0, t1):
        xx = sx(tick)
        out.append(f'<line x1="{xx:.2f}" y1="{y0 + _MT + ph}" x2="{xx:.2f}" y2="{y0 + _MT + ph + 4}" stroke="#444"/>')
        out.append(f'<text x="{xx:.2f}" y="{y0 + _MT + ph + 16}" font-size="10" text-anchor="middle">{tick:.4g}</text>')
    for i, (label, v) in enumerate(series):
        tt, vv = _envelope(np.asarray(t, dtype=float), np.asarray(v, dtype=float), pw)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(tt, vv))
        color = _PALETTE[i % len(_PALETTE)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        ly = y0 + _MT + 12 + 16 * i
        out.append(f'<line x1="{_W - _MR + 10}" y1="{ly}" x2="{_W - _MR + 30}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_W - _MR + 34}" y="{ly + 4}" font-size="11">{label}</text>')
    return out


def svg_document(t, panels: Sequence[tuple[str, Sequence[tuple[str, np.ndarray]]]], xlabel: str = "t [s]") -> str:
    """Stack ``(title, [(label, values), ...])`` panels sharing the time axis ``t``."""
    height = _PANEL_H * len(panels) + 20
    body = []
    for i, (title, series) in enumerate(panels):
        body += _panel(t, series, title, i * _PANEL_H)
    body.append(f'<text x="{_ML + (_W - _ML - _MR) // 2}" y="{height - 6}" font-size="11" text-anchor="middle">{xlabel}</text>')
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{height}" '
        f'viewBox="0 0 {_W} {height}" font-family="sans-serif">'
    )
    return "\n".join([head, f'<rect width="{_W}" height="{height}" fill="white"/>'] + body + ["</svg>"]) + "\n"


def run_svg(log) -> str:
    panels = [
        ("output y and reference r", [("y", log.y), ("r", log.r)]),
        ("control u", [("u", log.u)]),
        ("surface s", [("s", log.s)]),
    ]
    if log.xhat is not None:
        sc = log.scenario
        from .sim import build_observer, build_plant

        obs = build_observer(sc, build_plant(sc).active)
        ro = obs.velocity_readout
        panels.append(("velocity: true vs observed", [("true", log.x @ ro), ("observed", log.xhat @ ro)]))
    return svg_document(log.t, panels)


def overlay_svg(logs, labels, signal: str) -> str:
    series = [(label, getattr(log, signal)) for log, label in zip(logs, labels)]
    return svg_document(logs[0].t, [(f"{signal} overlay", series)])
