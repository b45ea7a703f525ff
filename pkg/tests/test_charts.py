import xml.etree.ElementTree as ET

import pytest

from solarstudy.charts import emit_svg_charts, render_chart
from solarstudy.errors import MissingSeries

SVG = "{http://www.w3.org/2000/svg}"


def test_fixture_charts(tables, tmp_path):
    paths = emit_svg_charts(*tables, tmp_path, {"K": "Karachi", "J": "Jacobabad"})
    assert sorted(p.name for p in paths) == sorted(
        f"fig_{lb}.svg" for lb in ["G", "D_K", "H_K", "E_K", "T_K", "D_J", "H_J", "E_J", "T_J"])
    for p in paths:
        root = ET.parse(p).getroot()
        assert root.tag == SVG + "svg" and root.get("version") == "1.1"
        lines = root.findall(SVG + "polyline")
        assert len(lines) == 2
        assert all(len(pl.get("points").split()) == 12 for pl in lines)
        assert lines[0].get("stroke-dasharray") is None
        assert lines[1].get("stroke-dasharray")
    text = (tmp_path / "fig_H_J.svg").read_text()
    assert "H_MAJ" in text and "H_MFJ" in text and "Jacobabad" in text
    assert ">Jan<" in text and ">Dec<" in text and ">Month<" in text


def test_deterministic(tables, tmp_path):
    a = [p.read_bytes() for p in emit_svg_charts(*tables, tmp_path / "a")]
    b = [p.read_bytes() for p in emit_svg_charts(*tables, tmp_path / "b")]
    assert a == b


def test_missing_forecast(tables, tmp_path):
    actual, forecast = tables
    fc = {k: v for k, v in forecast.items() if k != "E_K"}
    with pytest.raises(MissingSeries) as exc:
        emit_svg_charts(actual, fc, tmp_path)
    assert "E_MFK" in str(exc.value)
    assert not list(tmp_path.iterdir())


def test_flat_series_renders():
    svg = render_chart("T_K", [20.0] * 12, [20.0] * 12)
    assert len(ET.fromstring(svg.split("\n", 1)[1]).findall(SVG + "polyline")) == 2


def test_wrong_length():
    with pytest.raises(ValueError):
        render_chart("G", [1.0] * 11, [1.0] * 12)
