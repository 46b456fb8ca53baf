import xml.etree.ElementTree as ET

import numpy as np
import pytest

from dengue_seir.model import ModelParams, transmission_rate
from dengue_seir.plotting import RAMP, emit_plot, ramp_color, render_plot

NS = "{http://www.w3.org/2000/svg}"


def parse(text):
    return ET.fromstring(text)


def group(root, cls):
    return [g for g in root.iter(NS + "g") if g.get("class") == cls]


def test_timeseries_365_points(tmp_path):
    x = np.arange(365.0)
    path = emit_plot("timeseries", {"x": x, "series": {"cases": np.sin(x / 50) + 2}},
                     tmp_path / "ts.svg", title="t")
    root = ET.parse(path).getroot()
    line = next(root.iter(NS + "polyline"))
    assert len(line.get("points").split()) == 365
    assert group(root, "legend") and group(root, "axes")
    assert len(list(root.iter(NS + "text"))) > 6


def test_heatmap_cell_count():
    z = np.random.default_rng(0).random((20, 20))
    root = parse(render_plot("heatmap", {"z": z}))
    cells = list(group(root, "cells")[0].iter(NS + "rect"))
    assert len(cells) == 400


def test_heatmap_ramp_endpoints():
    z = np.array([[0.0, 1.0]])
    root = parse(render_plot("heatmap", {"z": z}))
    fills = [r.get("fill") for r in group(root, "cells")[0].iter(NS + "rect")]
    assert fills == [ramp_color(0.0), ramp_color(1.0)]
    assert ramp_color(0.0) == "#440154" and ramp_color(1.0) == "#fde725"
    assert ramp_color(-3) == ramp_color(0.0)
    assert [u for u, _ in RAMP] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_dual_axis_beta_with_rainfall():
    p = ModelParams(A_beta=0.10, t_p=200, sigma=60, beta_p=0.03, beta_np=0.02)
    t = np.linspace(0, 365, 366)
    data = {"x": t, "series": {"beta(t)": transmission_rate(p, t)},
            "bars": {"x": (np.arange(1, 13) - 0.5) * 365 / 12, "values": np.arange(12.0) * 30,
                     "width": 365 / 12, "label": "rainfall, mm"}}
    text = render_plot("timeseries", data)
    root = parse(text)
    assert len(list(group(root, "bars")[0].iter(NS + "rect"))) == 12
    assert "rainfall, mm" in text and "beta(t)" in text
    # a right-hand axis line is drawn at the plot's right edge
    xs = {ln.get("x1") for ln in root.iter(NS + "line") if ln.get("x1") == ln.get("x2")}
    assert len(xs) >= 2


def test_band():
    x = np.arange(50.0)
    root = parse(render_plot("band", {"x": x, "mean": x, "lower": x - 1, "upper": x + 1,
                                      "observed": x + 0.5}))
    assert root.find(f".//{NS}polygon") is not None
    assert len(list(group(root, "observed")[0])) == 50


def test_deterministic_bytes(tmp_path):
    z = np.arange(12.0).reshape(3, 4)
    a = emit_plot("heatmap", {"z": z}, tmp_path / "a.svg").read_bytes()
    b = emit_plot("heatmap", {"z": z}, tmp_path / "b.svg").read_bytes()
    assert a == b


@pytest.mark.parametrize("kind,data", [
    ("timeseries", {"x": [], "series": {"a": []}}),
    ("band", {"x": [], "mean": [], "lower": [], "upper": []}),
    ("heatmap", {"z": np.zeros((0, 0))}),
])
def test_empty_data(kind, data):
    with pytest.raises(ValueError):
        render_plot(kind, data)


def test_unknown_kind():
    with pytest.raises(ValueError):
        render_plot("pie", {})
