import json
import math

from bouquet import jsonio
from bouquet.address import linear_address


def test_floats_have_17_significant_digits():
    out = jsonio.dumps({"x": 0.1, "y": [1.0 / 3, 2]})
    assert out == '{"x":0.10000000000000001,"y":[0.33333333333333331,2]}'
    assert json.loads(out)["y"][0] == 1.0 / 3


def test_special_values_and_objects():
    out = json.loads(jsonio.dumps({"inf": math.inf, "z": 1 + 2j, "a": linear_address([1])}))
    assert out["inf"] == "inf"
    assert out["z"] == [1, 2]
    assert out["a"]["tail"]["kind"] == "linear"


def test_indent_round_trips():
    obj = {"a": [1, {"b": 2.5}], "c": {}}
    assert json.loads(jsonio.dumps(obj, indent=2)) == obj
