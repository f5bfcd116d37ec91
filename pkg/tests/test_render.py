"""SVG output: byte determinism, styling classes, highlight priority."""

import pytest

from latflip.edgeposet import EdgePoset
from latflip.geometry import edge
from latflip.region import make_boundary_condition, rectangle
from latflip.render import (
    COLOR_CONSTRAINT,
    COLOR_CROSSING,
    COLOR_FLIPPABLE,
    COLOR_HIGHLIGHT,
    render_svg,
)


def ground(n, k, extra=()):
    region = rectangle(n, k)
    bc = make_boundary_condition(region, extra)
    return EdgePoset.of(region, bc).ground_triangulation()


def test_single_cell_document_shape():
    svg = render_svg(ground(1, 1))
    assert svg.startswith(
        '<svg xmlns="http://www.w3.org/2000/svg" width="80" height="80" '
        'viewBox="0 0 80 80">')
    assert svg.endswith("</svg>\n")
    lines = [ln for ln in svg.splitlines() if "<line" in ln]
    assert len(lines) == 5  # four boundary edges plus the diagonal
    # the centre diagonal is the only flippable edge
    assert sum(COLOR_FLIPPABLE in ln for ln in lines) == 1
    assert sum(COLOR_CONSTRAINT in ln for ln in lines) == 4


def test_rendering_is_deterministic():
    sigma = ground(2, 2)
    assert render_svg(sigma) == render_svg(sigma.copy())


def test_monochrome_mode_uses_single_style():
    svg = render_svg(ground(2, 1), color_classes=False)
    lines = [ln for ln in svg.splitlines() if "<line" in ln]
    assert all('stroke="#000000" stroke-width="1"' in ln for ln in lines)


def test_highlight_outranks_other_classes():
    sigma = ground(2, 1)
    sigma.flip((2, 1))
    long_edge = sigma.edge_of[(2, 1)]
    assert long_edge == edge(0, 0, 2, 1)
    svg = render_svg(sigma, highlight=edge(1, 0, 1, 1))
    lines = [ln for ln in svg.splitlines() if "<line" in ln]
    # the highlighted ground edge is absent from sigma, but the long edge
    # crossing it is painted as a crossing
    assert sum(COLOR_HIGHLIGHT in ln for ln in lines) == 0
    crossing = [ln for ln in lines if COLOR_CROSSING in ln]
    assert len(crossing) == 1 and 'stroke-width="2"' in crossing[0]
    svg2 = render_svg(sigma, highlight=long_edge)
    red = [ln for ln in svg2.splitlines() if COLOR_HIGHLIGHT in ln]
    assert len(red) == 1 and 'stroke-width="3"' in red[0]


def test_scale_must_be_even():
    with pytest.raises(ValueError, match="scale must be even"):
        render_svg(ground(1, 1), scale=25)


def test_scale_and_margin_change_geometry_only():
    sigma = ground(1, 1)
    svg = render_svg(sigma, scale=10, margin=5)
    assert 'width="20" height="20"' in svg
    assert svg.count("<line") == 5
