"""Minimal deterministic SVG line/scatter plots (polyline + axis primitives).

No external renderer: the figures this package emits are simple enough that
hand-rolled SVG keeps outputs byte-reproducible across environments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi):
        return []
    if hi <= lo:
        return [lo]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / target))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if span / (step * mult) <= target:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    ticks = []
    d = math.floor(math.log10(lo))
    while 10.0**d <= hi * (1 + 1e-12):
        if 10.0**d >= lo * (1 - 1e-12):
            ticks.append(10.0**d)
        d += 1
    return ticks or [lo, hi]


@dataclass
class Series:
    label: str
    x: list
    y: list
    scatter: bool = False


@dataclass
class LinePlot:
    title: str
    xlabel: str
    ylabel: str
    width: int = 720
    height: int = 480
    xlog: bool = False
    ylog: bool = False
    series: list = field(default_factory=list)

    def add_series(self, label, x, y):
        self.series.append(Series(label, [float(v) for v in x], [float(v) for v in y]))

    def add_points(self, label, x, y):
        self.series.append(
            Series(label, [float(v) for v in x], [float(v) for v in y], scatter=True)
        )

    def _bounds(self):
        xs, ys = [], []
        for s in self.series:
            for xv, yv in zip(s.x, s.y):
                if not (math.isfinite(xv) and math.isfinite(yv)):
                    continue
                if self.xlog and xv <= 0:
                    continue
                if self.ylog and yv <= 0:
                    continue
                xs.append(xv)
                ys.append(yv)
        if not xs:
            return (0.1, 1.0, 0.1, 1.0) if (self.xlog or self.ylog) else (0.0, 1.0, 0.0, 1.0)
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 == x0:
            x1 = x0 * 2.0 if self.xlog else x0 + (abs(x0) or 1.0)
        if y1 == y0:
            y1 = y0 * 2.0 if self.ylog else y0 + (abs(y0) or 1.0)
        if self.xlog and x0 <= 0:
            x0, x1 = 0.1, max(1.0, x1)
        if self.ylog and y0 <= 0:
            y0, y1 = 0.1, max(1.0, y1)
        return x0, x1, y0, y1

    def render(self) -> str:
        left, right, top, bottom = 70, 20, 40, 50
        pw = self.width - left - right
        ph = self.height - top - bottom
        x0, x1, y0, y1 = self._bounds()

        def tx(v):
            if self.xlog:
                f = (math.log10(v) - math.log10(x0)) / (math.log10(x1) - math.log10(x0))
            else:
                f = (v - x0) / (x1 - x0)
            return left + f * pw

        def ty(v):
            if self.ylog:
                f = (math.log10(v) - math.log10(y0)) / (math.log10(y1) - math.log10(y0))
            else:
                f = (v - y0) / (y1 - y0)
            return top + (1.0 - f) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
            f'<text x="{self.width // 2}" y="24" text-anchor="middle" font-size="16" '
            f'font-family="sans-serif">{self.title}</text>',
        ]
        # axes box
        out.append(
            f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" '
            'stroke="black" stroke-width="1"/>'
        )
        xticks = _log_ticks(x0, x1) if self.xlog else _nice_ticks(x0, x1)
        yticks = _log_ticks(y0, y1) if self.ylog else _nice_ticks(y0, y1)
        for t in xticks:
            px = tx(t)
            out.append(
                f'<line x1="{px:.2f}" y1="{top + ph}" x2="{px:.2f}" y2="{top + ph + 5}" stroke="black"/>'
            )
            out.append(
                f'<text x="{px:.2f}" y="{top + ph + 18}" text-anchor="middle" font-size="11" '
                f'font-family="sans-serif">{_fmt(t)}</text>'
            )
        for t in yticks:
            py = ty(t)
            out.append(
                f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>'
            )
            out.append(
                f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end" font-size="11" '
                f'font-family="sans-serif">{_fmt(t)}</text>'
            )
        out.append(
            f'<text x="{left + pw // 2}" y="{self.height - 12}" text-anchor="middle" '
            f'font-size="13" font-family="sans-serif">{self.xlabel}</text>'
        )
        out.append(
            f'<text x="18" y="{top + ph // 2}" text-anchor="middle" font-size="13" '
            f'font-family="sans-serif" transform="rotate(-90 18 {top + ph // 2})">{self.ylabel}</text>'
        )
        for i, s in enumerate(self.series):
            color = _PALETTE[i % len(_PALETTE)]
            pts = [
                (tx(xv), ty(yv))
                for xv, yv in zip(s.x, s.y)
                if math.isfinite(xv)
                and math.isfinite(yv)
                and (not self.xlog or xv > 0)
                and (not self.ylog or yv > 0)
            ]
            if s.scatter:
                for px, py in pts:
                    out.append(
                        f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color}" fill-opacity="0.7"/>'
                    )
            elif pts:
                path = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
                out.append(
                    f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>'
                )
            out.append(
                f'<rect x="{left + pw - 150}" y="{top + 8 + 18 * i}" width="12" height="12" fill="{color}"/>'
            )
            out.append(
                f'<text x="{left + pw - 132}" y="{top + 18 + 18 * i}" font-size="12" '
                f'font-family="sans-serif">{s.label}</text>'
            )
        out.append("</svg>")
        return "\n".join(out) + "\n"
