"""Tiny self-contained SVG line charts for the command-line front end.

Deliberately minimal: fixed canvas, a handful of colors, straight polylines,
min/max tick labels.  Output is fully deterministic (no timestamps, fixed
number formatting), so identical data gives identical bytes.
"""

from __future__ import annotations

import math
from typing import IO, Sequence

__all__ = ["write_line_chart"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 40, 50


def _span(values: Sequence[float], log: bool) -> tuple[float, float]:
    vals = [v for v in values if not log or v > 0]
    if not vals:
        raise ValueError("no plottable values (log axes need positive data)")
    lo, hi = min(vals), max(vals)
    if lo == hi:
        pad = abs(lo) * 0.05 + (1e-9 if lo == 0 else 0.0)
        lo, hi = lo - pad - 1e-12, hi + pad + 1e-12
    return lo, hi


def _scale(v: float, lo: float, hi: float, log: bool) -> float:
    if log:
        return (math.log(v) - math.log(lo)) / (math.log(hi) - math.log(lo))
    return (v - lo) / (hi - lo)


def write_line_chart(
    fh: IO[str],
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    *,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    log_x: bool = False,
    log_y: bool = False,
) -> None:
    """Write one chart; ``series`` is a list of (label, xs, ys) triples."""
    if not series:
        raise ValueError("need at least one series")
    all_x = [x for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = _span(all_x, log_x)
    y_lo, y_hi = _span(all_y, log_y)
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(x: float) -> float:
        return _ML + _scale(x, x_lo, x_hi, log_x) * plot_w

    def py(y: float) -> float:
        return _H - _MB - _scale(y, y_lo, y_hi, log_y) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
        'stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
    ]
    if title:
        out.append(
            f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{_esc(title)}</text>'
        )
    if x_label:
        out.append(
            f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{_esc(x_label)}</text>'
        )
    if y_label:
        out.append(
            f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 16 {_H / 2:.1f})">{_esc(y_label)}</text>'
        )
    for value, anchor, x, y in (
        (x_lo, "middle", _ML, _H - _MB + 16),
        (x_hi, "middle", _W - _MR, _H - _MB + 16),
        (y_lo, "end", _ML - 6, _H - _MB + 4),
        (y_hi, "end", _ML - 6, _MT + 4),
    ):
        out.append(
            f'<text x="{x}" y="{y}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="11">{value:.6g}</text>'
        )
    for i, (label, xs, ys) in enumerate(series):
        if len(xs) != len(ys):
            raise ValueError(f"series {label!r} has mismatched lengths")
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(
            f"{px(x):.2f},{py(y):.2f}"
            for x, y in zip(xs, ys)
            if (not log_x or x > 0) and (not log_y or y > 0)
        )
        if pts:
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" '
                'stroke-width="1.5"/>'
            )
        out.append(
            f'<text x="{_W - _MR - 4}" y="{_MT + 14 + 14 * i}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11" fill="{color}">'
            f"{_esc(label)}</text>"
        )
    out.append("</svg>")
    fh.write("\n".join(out) + "\n")


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
