"""Minimal deterministic SVG charts.

No plotting library: identical inputs must yield byte-identical files, and
the figures needed here are just axis + polyline(s) or scatter + fitted
line. Numbers are serialized with a fixed format so output never depends on
platform repr quirks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

WIDTH = 640
HEIGHT = 400
MARGIN_L = 64
MARGIN_R = 24
MARGIN_T = 40
MARGIN_B = 48

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _fmt(x: float) -> str:
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def _nice_step(span: float, target: int = 5) -> float:
    if span <= 0:
        return 1.0
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            return mult * mag
    return 10.0 * mag


def _ticks(lo: float, hi: float) -> list[float]:
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * max(1.0, abs(hi)):
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        t += step
    return ticks


@dataclass(frozen=True)
class Series:
    label: str
    xs: tuple[float, ...]
    ys: tuple[float, ...]


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str,
                 xlim: tuple[float, float], ylim: tuple[float, float]):
        self.parts: list[str] = []
        self.xlim = xlim
        self.ylim = ylim
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">'
        )
        self.parts.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
        self._frame(title, xlabel, ylabel)

    def px(self, x: float) -> float:
        lo, hi = self.xlim
        frac = 0.5 if hi == lo else (x - lo) / (hi - lo)
        return MARGIN_L + frac * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y: float) -> float:
        lo, hi = self.ylim
        frac = 0.5 if hi == lo else (y - lo) / (hi - lo)
        return HEIGHT - MARGIN_B - frac * (HEIGHT - MARGIN_T - MARGIN_B)

    def _frame(self, title: str, xlabel: str, ylabel: str) -> None:
        x0, x1 = MARGIN_L, WIDTH - MARGIN_R
        y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
        add = self.parts.append
        add(f'<text x="{WIDTH // 2}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>')
        for t in _ticks(*self.xlim):
            px = self.px(t)
            add(f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y1}" '
                'stroke="#dddddd" stroke-width="1"/>')
            add(f'<text x="{_fmt(px)}" y="{y0 + 18}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
        for t in _ticks(*self.ylim):
            py = self.py(t)
            add(f'<line x1="{x0}" y1="{_fmt(py)}" x2="{x1}" y2="{_fmt(py)}" '
                'stroke="#dddddd" stroke-width="1"/>')
            add(f'<text x="{x0 - 6}" y="{_fmt(py + 4)}" text-anchor="end" '
                f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
        add(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
            'fill="none" stroke="#333333" stroke-width="1"/>')
        add(f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 10}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{xlabel}</text>')
        add(f'<text x="18" y="{(y0 + y1) // 2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13" '
            f'transform="rotate(-90 18 {(y0 + y1) // 2})">{ylabel}</text>')

    def legend(self, labels: list[tuple[str, str]]) -> None:
        x = WIDTH - MARGIN_R - 150
        y = MARGIN_T + 12
        for i, (label, color) in enumerate(labels):
            yy = y + 16 * i
            self.parts.append(
                f'<line x1="{x}" y1="{yy - 4}" x2="{x + 22}" y2="{yy - 4}" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            self.parts.append(
                f'<text x="{x + 28}" y="{yy}" font-family="sans-serif" '
                f'font-size="11">{label}</text>'
            )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _limits(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        pad = 1.0 if lo == 0 else abs(lo) * 0.1
    else:
        pad = (hi - lo) * 0.06
    return lo - pad, hi + pad


def line_chart(series: list[Series], title: str, xlabel: str, ylabel: str) -> str:
    """Polyline chart; one polyline element per series, legend included."""
    if not series:
        raise ValueError("line_chart needs at least one series")
    xlim = _limits([x for s in series for x in s.xs])
    ylim = _limits([y for s in series for y in s.ys])
    canvas = _Canvas(title, xlabel, ylabel, xlim, ylim)
    legend = []
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(canvas.px(x))},{_fmt(canvas.py(y))}" for x, y in zip(s.xs, s.ys))
        canvas.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        legend.append((s.label, color))
    canvas.legend(legend)
    return canvas.render()


def scatter_fit(
    points: list[tuple[float, float]],
    slope: float,
    intercept: float,
    title: str,
    xlabel: str,
    ylabel: str,
    fit_label: str,
) -> str:
    """Scatter markers plus one fitted line segment spanning the x range."""
    if not points:
        raise ValueError("scatter_fit needs at least one point")
    xlim = _limits([p[0] for p in points])
    fit_y = [slope * x + intercept for x in xlim]
    ylim = _limits([p[1] for p in points] + fit_y)
    canvas = _Canvas(title, xlabel, ylabel, xlim, ylim)
    x0, x1 = xlim
    canvas.parts.append(
        f'<line x1="{_fmt(canvas.px(x0))}" y1="{_fmt(canvas.py(slope * x0 + intercept))}" '
        f'x2="{_fmt(canvas.px(x1))}" y2="{_fmt(canvas.py(slope * x1 + intercept))}" '
        f'stroke="{PALETTE[1]}" stroke-width="2"/>'
    )
    for x, y in points:
        canvas.parts.append(
            f'<circle cx="{_fmt(canvas.px(x))}" cy="{_fmt(canvas.py(y))}" r="4" '
            f'fill="{PALETTE[0]}" fill-opacity="0.8"/>'
        )
    canvas.legend([("checkpoints", PALETTE[0]), (fit_label, PALETTE[1])])
    return canvas.render()
