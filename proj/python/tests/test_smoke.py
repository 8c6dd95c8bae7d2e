import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

import liesys

SCHEMA = json.loads((Path(__file__).resolve().parents[2] / "schema" / "report.schema.json").read_text())


def test_expressions():
    assert liesys.simplify("(x^2 - 1)/(x - 1)", ["x"]) == "1 + x"
    assert liesys.derivative("x^3", "x", ["x"]) == "3*x^2"
    assert liesys.evaluate("x*y + 1", ["x", "y"], {"x": 2.0, "y": 3.0}) == 7.0
    with pytest.raises(liesys.ExprParseError):
        liesys.simplify("x +", ["x"])
    with pytest.raises(ValueError):
        liesys.simplify("z", ["x"])


def test_riccati_algebra():
    fields = [["1"], ["x"], ["x^2"]]
    assert liesys.lie_bracket(["x"], ["1"], ["x^2"]) == ["2*x"]
    c = liesys.closure(["x"], fields)
    assert c["closed"] and c["dimension"] == 3
    assert c["jacobi_residual"] == 0.0
    open_ = liesys.closure(["x"], [["1"], ["x^2"]])
    assert not open_["closed"] and open_["witness"] == ["2*x"]
    assert liesys.closure(["x"], [["1"], ["x^2"]], complete=True)["dimension"] == 3
    assert liesys.minimal_m(["x"], fields)["m"] == 3


def test_prolongation_names_slots():
    names, comps = liesys.diagonal_prolongation(["x"], ["x^2"], 2)
    assert names == ["x_0", "x_1"]
    assert comps == ["x_0^2", "x_1^2"]


def test_integrate_matches_tan():
    t, x, truncated = liesys.integrate(["x"], [["1"], ["x^2"]], ["1", "1"], [0.0], (0.0, 1.0))
    assert not truncated
    assert isinstance(t, np.ndarray) and x.shape == (t.size, 1)
    assert abs(x[-1, 0] - math.tan(1.0)) < 1e-8
    t, x, _ = liesys.integrate(["x"], [["1"], ["x^2"]], ["1", "1"], [0.0], (0.0, 1.0), grid=[0.0, 0.5, 1.0])
    assert list(t) == [0.0, 0.5, 1.0]


def test_integrate_reports_blow_up():
    _, _, truncated = liesys.integrate(["x"], [["1"], ["x^2"]], ["1", "1"], [0.0], (0.0, 2.0))
    assert truncated


def test_catalog_reports_validate():
    names = liesys.catalog_names()
    assert "riccati" in names and len(names) == 11
    doc = liesys.example("riccati")
    report = liesys.run(doc, "superpose")
    jsonschema.validate(report, SCHEMA)
    assert report["verdict"] == "PASS"
    assert report["settings"]["seed"] == 20070613


def test_settings_override():
    report = liesys.run("riccati", "solve", tol=1e-7, t_span=(0.0, 0.5))
    assert report["settings"]["tol"] == 1e-7
    assert report["summary"]["end_time"] == 0.5


def test_schema_errors():
    with pytest.raises(liesys.SchemaError):
        liesys.run({"name": "empty"})
    with pytest.raises(liesys.SchemaError):
        liesys.run("riccati", "superpose", k=[1.0, 2.0])


def test_run_all_is_deterministic():
    a = liesys.run_all(seed=7)
    b = liesys.run_all(seed=7)
    assert a["verdict"] == "PASS"
    for ra, rb in zip(a["reports"], b["reports"]):
        jsonschema.validate(ra, SCHEMA)
        assert ra["checks"] == rb["checks"]
