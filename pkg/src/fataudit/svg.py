"""Dependency-free SVG line charts for research-mode curve tables."""
from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT, MARGIN = 480, 320, 40


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def line_chart(title: str, series: dict[str, list[tuple[float, float]]], highlight: str | None = None) -> str:
    """Responses are plotted on a fixed [0, 1] y-axis."""
    xs = [x for pts in series.values() for x, _ in pts]
    lo, hi = min(xs), max(xs)
    span = hi - lo or 1.0
    w, h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (x - lo) / span * w

    def py(y):
        return MARGIN + (1.0 - y) * h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<title>{escape(title)}</title>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="#999"/>',
        f'<text x="{MARGIN}" y="{MARGIN - 10}" font-size="12">{escape(title)}</text>',
        f'<text x="{MARGIN - 5}" y="{MARGIN + 4}" font-size="10" text-anchor="end">1</text>',
        f'<text x="{MARGIN - 5}" y="{MARGIN + h + 4}" font-size="10" text-anchor="end">0</text>',
    ]
    # highlighted series last so it is drawn on top
    names = [n for n in series if n != highlight] + ([highlight] if highlight in series else [])
    for name in names:
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in series[name])
        if name == highlight:
            style = 'stroke="#d62728" stroke-width="2.5"'
        else:
            style = 'stroke="#1f77b4" stroke-width="1" stroke-opacity="0.4"'
        parts.append(f'<polyline fill="none" {style} points="{pts}"><title>{escape(name)}</title></polyline>')
    parts.append("</svg>\n")
    return "\n".join(parts)
