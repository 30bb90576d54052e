"""Chart JSON schema and validation."""

import json

import pytest

from solab.charts import (
    ParamSpec,
    chart_from_dict,
    chart_from_sources,
    chart_to_dict,
    load_chart,
    save_chart,
)
from solab.errors import ChartValidationError, UnknownIdentifier

GOOD = {
    "dim": 2,
    "codim_total": 3,
    "params": [
        {"name": "u1", "min": 0.0, "max": 6.283185307179586, "periodic": True},
        {"name": "u2", "min": -2.0, "max": 2.0, "periodic": False},
    ],
    "coords": ["cos(u1)", "sin(u1)", "u2"],
}


def test_schema_round_trip(tmp_path):
    chart = chart_from_dict(GOOD)
    assert chart.dim == 2 and chart.codim_total == 3
    assert chart.params[0].periodic
    path = tmp_path / "cyl.json"
    save_chart(chart, path)
    reloaded = load_chart(path)
    assert chart_to_dict(reloaded) == chart_to_dict(chart)
    data = json.loads(path.read_text())
    assert set(data) == {"dim", "codim_total", "params", "coords"}


def test_unknown_top_level_field_rejected():
    bad = dict(GOOD, metric="round")
    with pytest.raises(ChartValidationError) as err:
        chart_from_dict(bad)
    assert "metric" in str(err.value)


def test_unknown_param_field_rejected():
    bad = json.loads(json.dumps(GOOD))
    bad["params"][0]["wrap"] = True
    with pytest.raises(ChartValidationError):
        chart_from_dict(bad)


def test_missing_field_rejected():
    bad = {k: v for k, v in GOOD.items() if k != "coords"}
    with pytest.raises(ChartValidationError):
        chart_from_dict(bad)


def test_codimension_must_be_positive():
    bad = dict(GOOD, codim_total=2, coords=["cos(u1)", "sin(u1)"])
    with pytest.raises(ChartValidationError):
        chart_from_dict(bad)


def test_coords_must_use_declared_parameters():
    bad = dict(GOOD, coords=["cos(u1)", "sin(u3)", "u2"])
    with pytest.raises(UnknownIdentifier):
        chart_from_dict(bad)


def test_empty_interval_rejected():
    with pytest.raises(ChartValidationError):
        chart_from_sources(
            1, 2, ["u1", "0"], [ParamSpec("u1", 1.0, 1.0)]
        )


def test_duplicate_names_rejected():
    with pytest.raises(ChartValidationError):
        chart_from_sources(
            2, 3, ["u1", "u1", "0"],
            [ParamSpec("u1", 0, 1), ParamSpec("u1", 0, 1)],
        )
