"""Tiny SVG 1.1 line plotter: axes, ticks, polylines and a legend."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 6)
        return [float(v) for v in range(a, b + 1, step) if lo - 1e-9 <= v <= hi + 1e-9]
    span = hi - lo
    raw = span / 5 if span > 0 else 1.0
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10)), key=lambda s: abs(s - raw))
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def _label(v, log):
    if log:
        return f"1e{int(round(v))}"
    return f"{v:.3g}"


def line_plot(path, series: Sequence[tuple], title: str = "", xlabel: str = "", ylabel: str = "",
              logx: bool = False, logy: bool = False, width: int = 640, height: int = 420,
              dashed: Sequence[int] = ()) -> Path:
    """series: (x, y, label) triples. Indices in `dashed` draw as dashed lines."""
    W, H = width, height
    ml, mr, mt, mb = 70, 20, 36, 50
    pts = []
    for x, y, _ in series:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logx:
            ok &= x > 0
        if logy:
            ok &= y > 0
        x, y = x[ok], y[ok]
        pts.append((np.log10(x) if logx else x, np.log10(y) if logy else y))
    xs = np.concatenate([p[0] for p in pts]) if pts else np.array([0.0, 1.0])
    ys = np.concatenate([p[1] for p in pts]) if pts else np.array([0.0, 1.0])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.04 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return ml + (v - x0) / (x1 - x0) * (W - ml - mr)

    def py(v):
        return H - mb - (v - y0) / (y1 - y0) * (H - mt - mb)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{W - ml - mr}" height="{H - mt - mb}" '
           'fill="none" stroke="black"/>']
    for v in _ticks(x0, x1, logx):
        X = px(v)
        out.append(f'<line x1="{X:.2f}" y1="{H - mb}" x2="{X:.2f}" y2="{H - mb + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{H - mb + 18}" font-size="11" text-anchor="middle">'
                   f'{_label(v, logx)}</text>')
    for v in _ticks(y0, y1, logy):
        Y = py(v)
        out.append(f'<line x1="{ml - 5}" y1="{Y:.2f}" x2="{ml}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{Y + 4:.2f}" font-size="11" text-anchor="end">'
                   f'{_label(v, logy)}</text>')
    for i, ((x, y), (_, _, lab)) in enumerate(zip(pts, series)):
        if len(x) == 0:
            continue
        if len(x) > 2000:
            idx = np.unique(np.linspace(0, len(x) - 1, 2000).astype(int))
            x, y = x[idx], y[idx]
        c = COLORS[i % len(COLORS)]
        d = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        dash = ' stroke-dasharray="6,4"' if i in dashed else ""
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5"{dash} points="{d}"/>')
        ly = mt + 16 + 16 * i
        out.append(f'<line x1="{W - mr - 150}" y1="{ly - 4}" x2="{W - mr - 130}" y2="{ly - 4}" '
                   f'stroke="{c}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{W - mr - 125}" y="{ly}" font-size="11">{escape(lab)}</text>')
    out.append(f'<text x="{W / 2}" y="22" font-size="14" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{W / 2}" y="{H - 12}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{H / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 16 {H / 2})">{escape(ylabel)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def reference_slope(xs, anchor_y, slope):
    """y = anchor_y (x/x0)^slope through the first point."""
    xs = np.asarray(xs, float)
    return anchor_y * (xs / xs[0]) ** slope
