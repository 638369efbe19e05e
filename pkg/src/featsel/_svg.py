"""Minimal deterministic SVG line charts (no plotting dependency).

Byte-for-byte reproducible: fixed canvas, fixed formatting, no timestamps
or generator metadata.  Good enough for the report plots; the CSV files
are the precise record.
"""

from __future__ import annotations

WIDTH = 640
HEIGHT = 420
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 20
MARGIN_BOTTOM = 55
TICKS = 5


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (TICKS - 1) for i in range(TICKS)]


def line_chart(points, x_label: str, y_label: str) -> str:
    """Render (x, y) pairs as an SVG polyline with axes and tick labels."""
    points = list(points)
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    if points:
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
    else:
        x_lo = x_hi = y_lo = y_hi = 0.0

    def sx(x):
        if x_hi == x_lo:
            return MARGIN_LEFT + plot_w / 2
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        if y_hi == y_lo:
            return MARGIN_TOP + plot_h / 2
        return MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP + plot_h}" '
        f'x2="{MARGIN_LEFT + plot_w}" y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" '
        f'x2="{MARGIN_LEFT}" y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
    ]
    if points:
        for tx in _ticks(x_lo, x_hi):
            px = _fmt(sx(tx))
            parts.append(
                f'<line x1="{px}" y1="{MARGIN_TOP + plot_h}" x2="{px}" '
                f'y2="{MARGIN_TOP + plot_h + 5}" stroke="black"/>'
            )
            parts.append(
                f'<text x="{px}" y="{MARGIN_TOP + plot_h + 20}" font-size="11" '
                f'text-anchor="middle" font-family="sans-serif">{_fmt(tx)}</text>'
            )
        for ty in _ticks(y_lo, y_hi):
            py = _fmt(sy(ty))
            parts.append(
                f'<line x1="{MARGIN_LEFT - 5}" y1="{py}" x2="{MARGIN_LEFT}" '
                f'y2="{py}" stroke="black"/>'
            )
            parts.append(
                f'<text x="{MARGIN_LEFT - 8}" y="{py}" font-size="11" '
                f'text-anchor="end" dominant-baseline="middle" '
                f'font-family="sans-serif">{_fmt(ty)}</text>'
            )
        coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="#1f6fb2" stroke-width="1.5"/>'
        )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.6g}" y="{HEIGHT - 12}" font-size="13" '
        f'text-anchor="middle" font-family="sans-serif">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{MARGIN_TOP + plot_h / 2:.6g}" font-size="13" '
        f'text-anchor="middle" font-family="sans-serif" '
        f'transform="rotate(-90 16 {MARGIN_TOP + plot_h / 2:.6g})">{y_label}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
