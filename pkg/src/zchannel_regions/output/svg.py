"""Minimal SVG documents for 2-D region slices."""

from __future__ import annotations

from collections.abc import Sequence
from xml.sax.saxutils import escape

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

Polygon = Sequence[tuple[float, float]]


def slice_plot(
    series: Sequence[tuple[str, Polygon]],
    x_label: str = "R11",
    y_label: str = "R21",
    title: str = "",
    width: int = 480,
    height: int = 400,
    margin: int = 50,
) -> str:
    """Closed polylines, one per labelled polygon, on shared nonnegative axes."""
    xs = [p[0] for _, poly in series for p in poly]
    ys = [p[1] for _, poly in series for p in poly]
    x_max = max([*xs, 1e-12])
    y_max = max([*ys, 1e-12])
    plot_w, plot_h = width - 2 * margin, height - 2 * margin

    def sx(x: float) -> float:
        return margin + plot_w * x / x_max

    def sy(y: float) -> float:
        return height - margin - plot_h * y / y_max

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle">'
        f"{escape(x_label)} (max {x_max:.4g})</text>",
        f'<text x="14" y="{height / 2:.1f}" transform="rotate(-90 14 {height / 2:.1f})" '
        f'text-anchor="middle">{escape(y_label)} (max {y_max:.4g})</text>',
    ]
    if title:
        lines.append(
            f'<text x="{width / 2:.1f}" y="24" text-anchor="middle">{escape(title)}</text>'
        )
    for i, (label, poly) in enumerate(series):
        if not poly:
            continue
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in [*poly, poly[0]])
        lines.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5">'
            f"<title>{escape(label)}</title></polyline>"
        )
        lines.append(
            f'<text x="{width - margin + 4}" y="{margin + 16 * i}" fill="{color}" '
            f'font-size="11">{escape(label)}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
