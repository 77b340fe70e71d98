"""Minimal SVG line charts: polylines, axes, ticks and a legend.

The output is a plain string, formatted deterministically so that the same
data always renders to the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

PALETTE = {"Wass": "#ff7f0e", "TV": "#1f77b4"}
FALLBACK = ("#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


@dataclass(frozen=True)
class PlotStyle:
    width: int = 640
    height: int = 420
    margin_left: int = 70
    margin_right: int = 140
    margin_top: int = 40
    margin_bottom: int = 55
    n_ticks: int = 5


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, count: int) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(count, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _label(v: float) -> str:
    return f"{v:.3g}"


def line_chart(series: Mapping[str, tuple[Sequence[float], Sequence[float]]], title: str = "",
               xlabel: str = "n", ylabel: str = "", log_y: bool = False, style: PlotStyle = PlotStyle()) -> str:
    """Render named ``(x, y)`` series. Non-finite points (and non-positive ones on a log axis) are dropped."""
    clean: dict[str, list[tuple[float, float]]] = {}
    for name, (xs, ys) in series.items():
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y) and (y > 0 or not log_y)]
        clean[name] = sorted(pts)
    allx = [p[0] for pts in clean.values() for p in pts]
    ally = [p[1] for pts in clean.values() for p in pts]
    if not allx:
        allx, ally = [0.0, 1.0], [1.0, 10.0] if log_y else [0.0, 1.0]
    xlo, xhi = min(allx), max(allx)
    if xhi == xlo:
        xlo, xhi = xlo - 1.0, xhi + 1.0
    tr = (lambda v: math.log10(v)) if log_y else (lambda v: v)
    ylo, yhi = tr(min(ally)), tr(max(ally))
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    s = style
    pw = s.width - s.margin_left - s.margin_right
    ph = s.height - s.margin_top - s.margin_bottom
    px = lambda x: s.margin_left + pw * (x - xlo) / (xhi - xlo)  # noqa: E731
    py = lambda y: s.margin_top + ph * (1.0 - (tr(y) - ylo) / (yhi - ylo))  # noqa: E731

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{s.width}" height="{s.height}" '
           f'viewBox="0 0 {s.width} {s.height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{s.width}" height="{s.height}" fill="white"/>']
    x0, y0 = s.margin_left, s.margin_top + ph
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{s.margin_top}" x2="{x0}" y2="{y0}" stroke="black"/>')

    for t in _nice_ticks(xlo, xhi, s.n_ticks):
        X = px(t)
        out.append(f'<line x1="{_fmt(X)}" y1="{y0}" x2="{_fmt(X)}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X)}" y="{y0 + 18}" text-anchor="middle">{_label(t)}</text>')
    if log_y:
        yticks = [10.0 ** e for e in range(math.floor(ylo), math.ceil(yhi) + 1) if ylo <= e <= yhi]
        if len(yticks) < 2:
            yticks = [10.0 ** t for t in _nice_ticks(ylo, yhi, s.n_ticks)]
    else:
        yticks = _nice_ticks(ylo, yhi, s.n_ticks)
    for t in yticks:
        Y = py(t)
        out.append(f'<line x1="{x0 - 5}" y1="{_fmt(Y)}" x2="{x0}" y2="{_fmt(Y)}" stroke="black"/>')
        out.append(f'<line x1="{x0}" y1="{_fmt(Y)}" x2="{x0 + pw}" y2="{_fmt(Y)}" stroke="#dddddd"/>')
        out.append(f'<text x="{x0 - 8}" y="{_fmt(Y + 4)}" text-anchor="end">{_label(t)}</text>')

    if title:
        out.append(f'<text x="{s.margin_left + pw / 2:.2f}" y="{s.margin_top - 15}" text-anchor="middle" '
                   f'font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{s.margin_left + pw / 2:.2f}" y="{s.height - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        cy = s.margin_top + ph / 2
        out.append(f'<text x="16" y="{cy:.2f}" text-anchor="middle" transform="rotate(-90 16 {cy:.2f})">'
                   f'{escape(ylabel)}</text>')

    extra = iter(FALLBACK)
    for i, (name, pts) in enumerate(clean.items()):
        color = PALETTE.get(name) or next(extra, "#000000")
        if pts:
            coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
            for x, y in pts:
                out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" fill="{color}"/>')
        ly = s.margin_top + 10 + 20 * i
        lx = s.margin_left + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def sweep_chart(records: Sequence[Mapping], title: str = "", log_y: bool = False) -> str:
    """Relative-error curves from sweep records, one series per metric (and per theorem if several)."""
    theorems = sorted({r["theorem"] for r in records})
    series: dict[str, tuple[list[float], list[float]]] = {}
    for r in records:
        name = r["metric"] if len(theorems) == 1 else f'{r["metric"]} {r["theorem"]}'
        xs, ys = series.setdefault(name, ([], []))
        xs.append(float(r["n"]))
        ys.append(float(r["rel_err"]))
    return line_chart(series, title=title, xlabel="n", ylabel="relative error", log_y=log_y)
