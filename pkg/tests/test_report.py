import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fataudit.report import dumps, format_float, table_to_csv


@pytest.mark.parametrize("x,text", [
    (0.1, "0.10000000000000001"),
    (1.0, "1"),
    (-0.0, "0"),
    (2.5e-10, "2.5000000000000002e-10"),
    (1e21, "1e+21"),
])
def test_format_float(x, text):
    assert format_float(x) == text


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        format_float(float("nan"))


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_seventeen_digits_round_trip(x):
    assert float(format_float(x)) == x


def test_dumps_layout():
    doc = {"b": 1, "a": [1.5, None, True], "c": {"n": np.float64(0.25)}, "d": [], "e": [{"x": "é"}]}
    text = dumps(doc)
    assert text == (
        '{\n  "b": 1,\n  "a": [1.5, null, true],\n  "c": {\n    "n": 0.25\n  },\n'
        '  "d": [],\n  "e": [\n    {\n      "x": "é"\n    }\n  ]\n}\n'
    )
    assert json.loads(text) == {"b": 1, "a": [1.5, None, True], "c": {"n": 0.25}, "d": [], "e": [{"x": "é"}]}


def test_dumps_arrays_and_errors():
    assert dumps(np.array([[1.0, 2.0]])) == "[\n  [1, 2]\n]\n"
    with pytest.raises(TypeError):
        dumps({1: 2})
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_table_to_csv():
    assert table_to_csv(("a", "b"), [("x,y", 0.1), ("z", 2)]) == 'a,b\n"x,y",0.10000000000000001\nz,2\n'
