import json

import numpy as np
import pytest

from fluxlab.curves import make_polyline, spiral_curve
from fluxlab.errors import ValidationError
from fluxlab.io import (
    config_from_csv,
    config_to_csv,
    curve_from_csv,
    curve_from_json,
    curve_to_json,
    load_curve,
    load_tabulated_model,
)
from fluxlab.models import c_lambda
from fluxlab.sampler import sample_ginibre


def test_curve_json_round_trip():
    c = spiral_curve(0.3, 5)
    assert curve_from_json(curve_to_json(c)) == c
    sq = make_polyline([0, 1, 1 + 1j], closed=True)
    back = curve_from_json(curve_to_json(sq))
    assert back.closed and back == sq


def test_curve_json_errors():
    with pytest.raises(ValidationError, match="vertex 1"):
        curve_from_json('{"vertices": [[0, 0], [1], [2, 2]], "closed": false}')
    with pytest.raises(ValidationError):
        curve_from_json("not json")
    with pytest.raises(ValidationError, match="boolean"):
        curve_from_json('{"vertices": [[0, 0], [1, 1]], "closed": "yes"}')


def test_curve_csv_header_optional():
    a = curve_from_csv("re,im\n0,0\n1,0\n1,1\n")
    b = curve_from_csv("0,0\n1,0\n1,1\n")
    assert a == b and a.length == 2.0
    with pytest.raises(ValidationError, match="row 2"):
        curve_from_csv("0,0\n1,0\nx,1\n")


def test_load_curve_files(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"vertices": [[0, 0], [2, 0], [2, 2]], "closed": True}))
    assert load_curve(p).length == pytest.approx(4 + 2 * np.sqrt(2))
    q = tmp_path / "c.csv"
    q.write_text("0,0\n3,4\n")
    assert load_curve(q).length == 5.0
    with pytest.raises(ValidationError, match="does not exist"):
        load_curve(tmp_path / "missing.json")


def test_config_round_trip():
    cfg = sample_ginibre(3.0, 9)
    text = config_to_csv(cfg)
    assert text.startswith("# {")
    back = config_from_csv(text)
    assert np.array_equal(back.points, cfg.points)
    assert back.header == cfg.header
    with pytest.raises(ValidationError):
        config_from_csv("re,im\n1,2\n")


def test_tabulated_model_files(tmp_path):
    t = np.linspace(0, 3.5, 300)
    k = -np.exp(-np.pi * t * t) / np.pi**2
    csv_path = tmp_path / "g.csv"
    csv_path.write_text("t,k\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(t, k)))
    (tmp_path / "g.json").write_text(json.dumps({"name": "tab-ginibre", "intensity": 1 / np.pi**2}))
    m = load_tabulated_model(csv_path)
    assert m.name == "tab-ginibre"
    assert c_lambda(m) == pytest.approx(2 / np.pi, rel=1e-6)
    (tmp_path / "h.csv").write_text("0,1\n1,0\n")
    with pytest.raises(ValidationError, match="sidecar"):
        load_tabulated_model(tmp_path / "h.csv")
