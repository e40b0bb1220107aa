"""Minimal self-contained SVG line plots (no plotting dependency).

Only what the sweep command needs: a log-scale y axis, a handful of series,
ticks and a legend.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

_WIDTH, _HEIGHT = 720, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 80, 24, 36, 56
_COLORS = ("#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085")


def _log_ticks(lo: float, hi: float) -> list[float]:
    lo_exp = math.floor(math.log10(lo))
    hi_exp = math.ceil(math.log10(hi))
    return [10.0 ** e for e in range(lo_exp, hi_exp + 1)]


def line_plot_svg(series: dict[str, list[tuple[float, float]]], title: str,
                  x_label: str, y_label: str, log_y: bool = True,
                  comment: str | None = None) -> str:
    """Render named (x, y) series; non-positive y values are skipped on a log axis."""
    pts_all = [(x, y) for pts in series.values() for x, y in pts
               if not log_y or y > 0.0]
    if not pts_all:
        raise ValueError("nothing to plot: no positive data points")
    xs = [p[0] for p in pts_all]
    ys = [p[1] for p in pts_all]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if log_y:
        y_ticks = _log_ticks(y_lo, y_hi)
        y_lo, y_hi = y_ticks[0], y_ticks[-1]
    else:
        span = (y_hi - y_lo) or 1.0
        y_ticks = [y_lo + k * span / 5 for k in range(6)]

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        if log_y:
            f = (math.log10(y) - math.log10(y_lo)) / (math.log10(y_hi) - math.log10(y_lo))
        else:
            f = (y - y_lo) / (y_hi - y_lo)
        return _MARGIN_T + (1.0 - f) * plot_h

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
           f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">']
    if comment:
        out.append(f"<!-- {escape(comment)} -->")
    out.append(f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>')
    out.append(f'<text x="{_WIDTH / 2:.1f}" y="22" text-anchor="middle" '
               f'font-size="15" font-family="sans-serif">{escape(title)}</text>')
    # axes
    out.append(f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
               f'y2="{_HEIGHT - _MARGIN_B}" stroke="black"/>')
    out.append(f'<line x1="{_MARGIN_L}" y1="{_HEIGHT - _MARGIN_B}" '
               f'x2="{_WIDTH - _MARGIN_R}" y2="{_HEIGHT - _MARGIN_B}" stroke="black"/>')
    n_x_ticks = 7
    for k in range(n_x_ticks):
        x = x_lo + k * (x_hi - x_lo) / (n_x_ticks - 1)
        out.append(f'<line x1="{px(x):.1f}" y1="{_HEIGHT - _MARGIN_B}" '
                   f'x2="{px(x):.1f}" y2="{_HEIGHT - _MARGIN_B + 5}" stroke="black"/>')
        out.append(f'<text x="{px(x):.1f}" y="{_HEIGHT - _MARGIN_B + 20}" '
                   f'text-anchor="middle" font-size="11" '
                   f'font-family="sans-serif">{x:g}</text>')
    for y in y_ticks:
        out.append(f'<line x1="{_MARGIN_L - 5}" y1="{py(y):.1f}" '
                   f'x2="{_MARGIN_L}" y2="{py(y):.1f}" stroke="black"/>')
        label = f"1e{int(round(math.log10(y)))}" if log_y else f"{y:g}"
        out.append(f'<text x="{_MARGIN_L - 8}" y="{py(y) + 4:.1f}" '
                   f'text-anchor="end" font-size="11" '
                   f'font-family="sans-serif">{label}</text>')
    out.append(f'<text x="{_WIDTH / 2:.1f}" y="{_HEIGHT - 14}" text-anchor="middle" '
               f'font-size="13" font-family="sans-serif">{escape(x_label)}</text>')
    out.append(f'<text x="20" y="{_HEIGHT / 2:.1f}" text-anchor="middle" '
               f'font-size="13" font-family="sans-serif" '
               f'transform="rotate(-90 20 {_HEIGHT / 2:.1f})">{escape(y_label)}</text>')
    for idx, (name, pts) in enumerate(series.items()):
        color = _COLORS[idx % len(_COLORS)]
        kept = [(x, y) for x, y in pts if not log_y or y > 0.0]
        if not kept:
            continue
        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in kept)
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                   f'stroke-width="1.8"/>')
        ly = _MARGIN_T + 16 + 16 * idx
        lx = _WIDTH - _MARGIN_R - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.8"/>')
        out.append(f'<text x="{lx + 28}" y="{ly}" font-size="12" '
                   f'font-family="sans-serif">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
