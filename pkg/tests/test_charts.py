"""SVG chart structure and series aggregation."""

import xml.etree.ElementTree as ET

import pytest

from sparselab.charts import (
    Series,
    _padded_range,
    build_series,
    render_line_chart_png,
    render_line_chart_svg,
)


def rows_for(kind, sparsity, pairs, seeds=(0,)):
    return [
        {"model_kind": kind, "sparsity": sparsity, "width": x, "eval_mse": y, "seed": s}
        for s in seeds
        for x, y in pairs
    ]


def test_padded_range_adds_five_percent():
    assert _padded_range(0.0, 10.0) == (-0.5, 10.5)
    lo, hi = _padded_range(2.0, 4.0, frac=0.1)
    assert lo == pytest.approx(1.8) and hi == pytest.approx(4.2)


def test_padded_range_degenerate_and_invalid():
    assert _padded_range(3.0, 3.0) == (2.5, 3.5)
    with pytest.raises(ValueError):
        _padded_range(2.0, 1.0)


def test_build_series_groups_by_kind_and_sparsity():
    rows = rows_for("dense", 1.0, [(64, 0.5), (128, 0.3)]) + rows_for(
        "topk", 0.25, [(256, 0.2), (512, 0.1)]
    )
    series = build_series(rows, "width", "eval_mse")
    assert [s.label for s in series] == ["dense", "topk 25%"]
    assert series[0].xs == (64.0, 128.0)
    assert series[1].ys == (0.2, 0.1)


def test_build_series_takes_median_across_seeds():
    rows = (
        rows_for("dense", 1.0, [(64, 1.0)], seeds=(0,))
        + rows_for("dense", 1.0, [(64, 2.0)], seeds=(1,))
        + rows_for("dense", 1.0, [(64, 10.0)], seeds=(2,))
    )
    series = build_series(rows, "width", "eval_mse")
    assert series[0].ys == (2.0,)


def test_build_series_sorts_x_and_skips_error_rows():
    rows = rows_for("dense", 1.0, [(128, 0.3), (64, 0.5)])
    rows.append({"model_kind": "dense", "sparsity": 1.0, "width": 256, "eval_mse": None,
                 "seed": 0, "error": "ValueError: boom"})
    series = build_series(rows, "width", "eval_mse")
    assert series[0].xs == (64.0, 128.0)


def test_build_series_rejects_empty_and_missing_columns():
    with pytest.raises(ValueError):
        build_series([], "width", "eval_mse")
    with pytest.raises(ValueError):
        build_series([{"model_kind": "dense", "sparsity": 1.0, "width": 64}], "width", "eval_mse")
    with pytest.raises(ValueError):
        build_series([], "wall_ms", "eval_mse")  # not a plottable x column


def test_svg_has_one_polyline_per_series():
    series = [
        Series("a", (64.0, 128.0, 256.0), (0.5, 0.3, 0.2)),
        Series("b", (64.0, 128.0, 256.0), (0.4, 0.2, 0.1)),
    ]
    svg = render_line_chart_svg(series, "width", "eval_mse")
    assert svg.count("<polyline") == 2
    assert svg.count("<line") == 2  # legend swatches are not polylines
    assert "a</text>" in svg and "b</text>" in svg


def test_svg_is_wellformed_and_self_contained():
    series = [Series("dense", (64.0, 128.0), (0.5, 0.25))]
    svg = render_line_chart_svg(series, "width", "eval_mse")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert "http" not in svg.replace("http://www.w3.org/2000/svg", "")  # no external refs


def test_svg_points_fall_inside_padded_plot_area():
    series = [Series("a", (2.0, 4096.0), (1e-6, 1.0))]
    svg = render_line_chart_svg(series, "width", "eval_mse")
    root = ET.fromstring(svg)
    ns = "{http://www.w3.org/2000/svg}"
    polyline = root.find(f"{ns}polyline")
    coords = [tuple(map(float, p.split(","))) for p in polyline.attrib["points"].split()]
    frame = [el for el in root.findall(f"{ns}rect") if el.attrib.get("fill") == "none"][0]
    x0, y0 = float(frame.attrib["x"]), float(frame.attrib["y"])
    x1 = x0 + float(frame.attrib["width"])
    y1 = y0 + float(frame.attrib["height"])
    for x, y in coords:
        # 5% padding keeps data strictly inside the frame
        assert x0 < x < x1 and y0 < y < y1


def test_svg_rejects_nonpositive_values_for_log_axes():
    with pytest.raises(ValueError):
        render_line_chart_svg([Series("a", (64.0,), (0.0,))], "width", "eval_mse")
    with pytest.raises(ValueError):
        render_line_chart_svg([Series("a", (-2.0,), (0.1,))], "width", "eval_mse")
    with pytest.raises(ValueError):
        render_line_chart_svg([], "width", "eval_mse")


def test_png_sibling_renders(tmp_path):
    series = [Series("dense", (64.0, 128.0), (0.5, 0.25))]
    path = tmp_path / "chart.png"
    render_line_chart_png(series, "width", "eval_mse", path)
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
