import json

from bouquet.cli import main
from bouquet.verify import run_verify


def test_model_suite_passes_with_fixed_seed():
    code, report = run_verify("model", seed=0)
    assert code == 0 and report.passed
    data = report.to_json()
    assert set(data) == {"suite", "seed", "cases", "failures"}
    assert data["cases"] > 500


def test_unknown_suite_exits_2():
    assert run_verify("nonsense")[0] == 2
    assert run_verify("model", inject_bug="nonsense")[0] == 2


def test_negative_controls_fail():
    assert run_verify("model", inject_bug="psi")[0] == 1
    assert run_verify("plane", inject_bug="band")[0] == 1


def test_seeded_bug_fails_all():
    code, report = run_verify("all", inject_bug="psi")
    assert code == 1
    ids = [f["id"] for f in report.to_json()["failures"]]
    assert any(i.startswith("oracle/") for i in ids)


def test_report_files(tmp_path, capsys):
    code = main(["verify", "plane", "--out", str(tmp_path)])
    capsys.readouterr()
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["suite"] == "plane" and report["failures"] == []
    rows = (tmp_path / "cases.tsv").read_text().splitlines()
    assert rows[0].split("\t")[:3] == ["check", "id", "ok"]
    assert len(rows) == report["cases"] + 1
    assert (tmp_path / "plane.png").stat().st_size > 0
