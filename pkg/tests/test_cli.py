import json
import math

import pytest

from bouquet.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_potential_json(capsys):
    code, out = run(capsys, "potential", "--address", "0,1;const:0", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["potential"] == pytest.approx(math.log1p(2 * math.pi), abs=1e-12)
    # 17 significant digits
    assert '"potential":1.9855683087099187' in out


def test_invalid_address_exits_2(capsys):
    code, out = run(capsys, "potential", "--address", "zz")
    assert code == 2 and "error" in out


def test_missing_address_exits_2(capsys):
    assert run(capsys, "graph")[0] == 2


def test_numeric_limit_exits_3(capsys):
    code, out = run(capsys, "target", "--address", "3,-2,5,1;linear:1,0:+", "--target", "6", "--json")
    assert code == 3 and json.loads(out)["kind"] == "BudgetExhausted"
    code, _ = run(capsys, "potential", "--address", "0,1000000;const:0", "--cap", "5")
    assert code == 3


def test_target_and_graph(capsys):
    code, out = run(capsys, "target", "--address", "3,-2,5,1;linear:1,0:+", "--target", "4",
                    "--prefix-agree", "2", "--json")
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"address", "potential", "error_bound"}
    assert abs(data["potential"] - 4) <= 1e-3
    code, out = run(capsys, "graph", "--address", "const:0", "--json")
    assert json.loads(out)["erdos"] == 1


def test_ray_output_schema(capsys):
    code, out = run(capsys, "ray", "--address", "0;linear:1,0:+", "--t", "3", "--json")
    data = json.loads(out)
    assert code == 0
    assert {"re", "im", "error_estimate", "checks"} <= set(data)
    assert data["checks"] == {"band": True, "julia": True}


def test_plane_commands(capsys):
    assert json.loads(run(capsys, "cycle", "--a=-2,0", "--json")[1])["kind"] == "attracting"
    assert json.loads(run(capsys, "classify", "--z=-2,0", "--json")[1])["class"] == "AttractedToCycle"
    assert json.loads(run(capsys, "classify", "--address", "linear:1,0:-", "--json")[1])["class"] == \
        "ImagMinusEscape"
    out = json.loads(run(capsys, "member", "--z=-1,0", "--json")[1])
    assert out["result"] == "FailsAt"
    out = json.loads(run(capsys, "orbit", "--z=0,0", "--steps", "3", "--json")[1])
    assert out["points"] == [[0, 0]] * 4
    assert run(capsys, "endpoint", "--address", "1;linear:2,0:alt")[0] == 0


def test_model_commands(capsys):
    out = json.loads(run(capsys, "member", "--address", "0,1;const:0", "--t", "1", "--json")[1])
    assert out == {"address": out["address"], "t": 1, "result": "FailsAt", "n": 1}
    out = json.loads(run(capsys, "orbit", "--address", "0;linear:1,0:+", "--steps", "4", "--json")[1])
    assert len(out["potentials"]) == 5
    out = json.loads(run(capsys, "tstar", "--address", "0;linear:1,0:+", "--json")[1])
    assert out["t_star"] > 0


def test_strata_commands(capsys):
    out = json.loads(run(capsys, "strata", "--stratum", "1:0", "--address", "0,3;linear:1,0:+", "--json")[1])
    assert out["in_tree"] and out["member"] and out["successor"] == [[1, 0], [1, 3]]
    code, _ = run(capsys, "strata", "--certify", "--depth", "2", "--samples", "30")
    assert code == 0


def test_render_writes_files(capsys, tmp_path):
    code, out = run(capsys, "render", "--size", "60x40", "--max-iter", "20", "--overlay", "const:0",
                    "--out", str(tmp_path), "--json")
    assert code == 0
    assert (tmp_path / "julia.ppm").read_bytes().startswith(b"P6\n60 40\n")
    assert (tmp_path / "rays.svg").read_text().count("<path") == 1


def test_bad_viewport_exits_2(capsys, tmp_path):
    assert run(capsys, "render", "--viewport", "1,1,0,1", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "render", "--size", "axb", "--out", str(tmp_path))[0] == 2
