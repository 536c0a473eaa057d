"""Minimal SVG emitter for scatter plots with optional lines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str
    line: bool = False
    yerr: Sequence[float] = field(default=None)


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def plot(series: Sequence[Series], title: str = "", xlabel: str = "", ylabel: str = "",
         logx: bool = False, logy: bool = False, note: str = "", width: int = 640, height: int = 440) -> str:
    """Render the series to an SVG document string."""
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    ty = (lambda v: math.log10(v)) if logy else (lambda v: v)
    xs = [tx(v) for s in series for v in s.x]
    ys = [ty(v) for s in series for v in s.y]
    if not xs:
        raise ValueError("nothing to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad_y = 0.06 * (y1 - y0)
    y0, y1 = y0 - pad_y, y1 + pad_y
    left, right, top, bottom = 80, 20, 40, 60
    pw, ph = width - left - right, height - top - bottom

    def px(v):
        return left + (tx(v) - x0) / (x1 - x0) * pw

    def py(v):
        return top + (1 - (ty(v) - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
        f'<text x="{width / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{left + pw / 2}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="18" y="{top + ph / 2}" text-anchor="middle" transform="rotate(-90 18 {top + ph / 2})">{escape(ylabel)}</text>',
    ]
    for t in _ticks(x0, x1):
        X = left + (t - x0) / (x1 - x0) * pw
        lab = f"{10 ** t:.3g}" if logx else f"{t:.3g}"
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 5}" stroke="#333"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 18}" text-anchor="middle">{lab}</text>')
    for t in _ticks(y0, y1):
        Y = top + (1 - (t - y0) / (y1 - y0)) * ph
        lab = f"{10 ** t:.3g}" if logy else f"{t:.3g}"
        out.append(f'<line x1="{left - 5}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="#333"/>')
        out.append(f'<text x="{left - 8}" y="{Y + 4:.2f}" text-anchor="end">{lab}</text>')
    for n, s in enumerate(series):
        color = _COLORS[n % len(_COLORS)]
        pts = [(px(a), py(b)) for a, b in zip(s.x, s.y)]
        if s.line:
            path = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            for k, (a, b) in enumerate(pts):
                out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3.5" fill="{color}"/>')
                if s.yerr is not None and not logy:
                    e = s.yerr[k]
                    out.append(
                        f'<line x1="{a:.2f}" y1="{py(s.y[k] - e):.2f}" x2="{a:.2f}" y2="{py(s.y[k] + e):.2f}" stroke="{color}"/>'
                    )
        out.append(f'<text x="{left + 10}" y="{top + 18 + 16 * n}" fill="{color}">{escape(s.label)}</text>')
    if note:
        out.append(f'<text x="{left + pw - 10}" y="{top + ph - 10}" text-anchor="end">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
