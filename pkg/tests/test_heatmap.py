"""SVG heatmap rendering: cell shading, overlay polyline, well-formedness."""

import xml.etree.ElementTree as ET

import pytest

from corrsense import BINARY_SPARSE, CellResult, TheoryPoint, render_heatmap_svg

_NS = "{http://www.w3.org/2000/svg}"


def _cell(n, s_cor, rate, experiment=BINARY_SPARSE, p=30):
    trials = 10
    successes = int(round(rate * trials))
    return CellResult(
        experiment=experiment, p=p, n=n, m=None, k=None, s_sig=None,
        s_cor=s_cor, trials=trials, successes=successes,
        success_rate=successes / trials, mean_rel_error=0.1, maxiter_count=0,
    )


def _grid():
    return [
        _cell(40, 2, 0.0),
        _cell(40, 4, 0.5),
        _cell(50, 2, 1.0),
        _cell(50, 4, 1.0),
    ]


def test_svg_parses_and_shades_cells():
    svg = render_heatmap_svg(_grid())
    root = ET.fromstring(svg)
    fills = [r.get("fill") for r in root.iter(f"{_NS}rect")]
    assert "#000000" in fills
    assert "#808080" in fills  # round(255 * 0.5) = 128
    assert fills.count("#ffffff") == 2
    title = next(t for t in root.iter(f"{_NS}text"))
    assert title.text == "binary_sparse_constrained  p=30"


def test_overlay_breaks_at_missing_ordinate():
    theory = [
        TheoryPoint("n", 40, "s_cor", 2.5),
        TheoryPoint("n", 50, "s_cor", None),
        TheoryPoint("n", 60, "s_cor", 3.0),
        TheoryPoint("n", 70, "s_cor", 3.5),
    ]
    results = [_cell(n, sc, 0.5) for n in (40, 50, 60, 70) for sc in (2, 4)]
    svg = render_heatmap_svg(results, theory)
    root = ET.fromstring(svg)
    polylines = list(root.iter(f"{_NS}polyline"))
    # the gap splits the curve; the leading single point cannot form a line
    assert len(polylines) == 1
    assert len(polylines[0].get("points").split()) == 2


def test_overlay_single_run():
    theory = [TheoryPoint("n", 40, "s_cor", 2.0), TheoryPoint("n", 50, "s_cor", 4.0)]
    svg = render_heatmap_svg(_grid(), theory)
    root = ET.fromstring(svg)
    (poly,) = list(root.iter(f"{_NS}polyline"))
    assert poly.get("stroke") == "red"
    first, second = poly.get("points").split()
    # ordinate 2.0 is the bottom grid row, 4.0 the top row
    assert float(first.split(",")[1]) > float(second.split(",")[1])


def test_title_is_escaped():
    results = [_cell(40, 2, 0.5, experiment="a<b&c")]
    svg = render_heatmap_svg(results)
    assert "a&lt;b&amp;c" in svg
    ET.fromstring(svg)


def test_empty_results_rejected():
    with pytest.raises(ValueError):
        render_heatmap_svg([])
