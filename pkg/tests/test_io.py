import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rigidemt.io import csv_text, dumps, fmt_float, load_matrix


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip(x):
    assert float(fmt_float(x)) == x


def test_dumps_is_valid_json_and_deterministic():
    obj = {"b": [1, 2.5, np.float64(0.1)], "a": {"z": 1 + 2j, "arr": np.eye(2)}, "flag": True, "none": None}
    s = dumps(obj)
    assert s == dumps(obj)
    back = json.loads(s)
    assert back["b"][2] == 0.1 and back["a"]["z"] == [1.0, 2.0] and back["a"]["arr"] == [[1.0, 0.0], [0.0, 1.0]]


def test_csv():
    txt = csv_text(["x", "y"], [[0.1, "a"], [2.0, 3]])
    assert txt.splitlines() == ["x,y", "0.10000000000000001,a", "2.0,3"]


def test_load_matrix(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"S": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}))
    np.testing.assert_array_equal(load_matrix(p), np.eye(3))
    p.write_text("[[1, 2], [3, 4]]")
    with pytest.raises(ValueError, match="3x3"):
        load_matrix(p)
