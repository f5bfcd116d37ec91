"""Deterministic SVG rendering of triangulations.

One <line> element per edge, emitted in midpoint order with integer pixel
coordinates, so identical states render to identical bytes.  Optional
styling: constraint edges black and thick, flippable edges blue, other
edges gray; a highlighted edge is drawn red with its crossing set orange.
"""

from __future__ import annotations

from .geometry import Edge, open_segments_intersect
from .triangulation import Triangulation

COLOR_CONSTRAINT = "#000000"
COLOR_FLIPPABLE = "#1f77b4"   # blue
COLOR_FROZEN = "#888888"      # unflippable, not a constraint
COLOR_PLAIN = "#000000"
COLOR_HIGHLIGHT = "#d62728"   # red
COLOR_CROSSING = "#ff7f0e"    # orange


def render_svg(sigma: Triangulation, *, color_classes: bool = True,
               highlight: Edge | None = None, scale: int = 40,
               margin: int = 20) -> str:
    """Render a triangulation as a standalone SVG document.

    scale is pixels per original lattice unit and must be even so every
    doubled coordinate maps to an integer pixel.  With color_classes off,
    every non-highlighted edge is black.  highlight draws that edge red and
    every edge openly crossing it orange.
    """
    if scale % 2:
        raise ValueError("scale must be even")
    region = sigma.region
    xs = [v[0] for v in region.vertices]
    ys = [v[1] for v in region.vertices]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    half = scale // 2

    def px(p) -> tuple[int, int]:
        return (margin + (p[0] - x_lo) * half,
                margin + (y_hi - p[1]) * half)

    width = margin * 2 + (x_hi - x_lo) * half
    height = margin * 2 + (y_hi - y_lo) * half

    lines = []
    for x in region.midpoints:
        e = sigma.edge_of[x]
        if highlight is not None and e == highlight:
            color, sw = COLOR_HIGHLIGHT, 3
        elif highlight is not None and open_segments_intersect(e, highlight):
            color, sw = COLOR_CROSSING, 2
        elif not color_classes:
            color, sw = COLOR_PLAIN, 1
        elif x in sigma.bc.by_midpoint:
            color, sw = COLOR_CONSTRAINT, 2
        elif sigma.is_flippable(x):
            color, sw = COLOR_FLIPPABLE, 1
        else:
            color, sw = COLOR_FROZEN, 1
        (x1, y1), (x2, y2) = px(e.a), px(e.b)
        lines.append(
            '<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="%s" '
            'stroke-width="%d" />' % (x1, y1, x2, y2, color, sw))

    body = "\n".join("  " + ln for ln in lines)
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">\n%s\n</svg>\n' % (width, height, width, height, body))
