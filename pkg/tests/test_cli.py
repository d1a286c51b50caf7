import json
from pathlib import Path

import pytest

from grassflow.cli import main, run_scenario

SCEN = Path(__file__).resolve().parents[1] / "scenarios"
GOOD = sorted(p.name for p in SCEN.glob("*.json") if p.name != "malformed.json")


@pytest.mark.parametrize("name", GOOD)
def test_bundled_scenarios_pass(name, tmp_path):
    code, report = run_scenario(SCEN / name, tmp_path)
    assert code == 0, report and [c for c in report["checks"] if not c["pass"]]
    assert (tmp_path / "report.json").exists()
    assert set(report["artifacts"]) == {p.name for p in tmp_path.iterdir()}


def test_malformed_exits_2_without_artifacts(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(SCEN / "malformed.json"), "--out-dir", str(out)]) == 2
    assert not out.exists()


def _write(tmp_path, sc):
    p = tmp_path / "sc.json"
    p.write_text(json.dumps(sc))
    return p


def test_missing_seed_is_schema_error(tmp_path):
    sc = {"schema": 1, "task": "invariants", "ambient": {"kind": "euclidean"},
          "loop": {"generator": "circle"}, "params": {}}
    assert run_scenario(_write(tmp_path, sc), tmp_path / "o")[0] == 2


def test_unknown_field_and_generator(tmp_path):
    sc = {"schema": 1, "task": "cocycle_table", "ambient": {"kind": "torus"},
          "base": {"generator": "torus_loop"}, "fields": ["nope"]}
    assert run_scenario(_write(tmp_path, sc), tmp_path / "o")[0] == 2
    sc = {"schema": 1, "task": "flow", "loop": {"generator": "square"}, "params": {"dt": 0.01, "steps": 1}}
    assert run_scenario(_write(tmp_path, sc), tmp_path / "o")[0] == 2


def test_failed_check_exits_1(tmp_path):
    sc = {"schema": 1, "task": "sphere_example", "ambient": {"kind": "sphere"},
          "tolerances": {"value_mod_1_error": 1e-300}}
    code, report = run_scenario(_write(tmp_path, sc), tmp_path / "o")
    assert code == 1 and report["pass"] is False


def test_numerical_failure_exits_3(tmp_path):
    sc = {"schema": 1, "task": "flow", "ambient": {"kind": "torus"},
          "loop": {"generator": "torus_loop", "params": {"n": 8, "wobble": 0.2, "offsets": [0.3, 0.4]}},
          "params": {"dt": 0.5, "steps": 50, "integrator": "euler"}}
    assert run_scenario(_write(tmp_path, sc), tmp_path / "o")[0] == 3


def test_reports_deterministic(tmp_path):
    a = run_scenario(SCEN / "trefoil_flow.json", tmp_path / "a")[1]
    b = run_scenario(SCEN / "trefoil_flow.json", tmp_path / "b")[1]
    assert a["checks"] == b["checks"] and a["results"] == b["results"]
    assert (tmp_path / "a" / "diagnostics.csv").read_text() == (tmp_path / "b" / "diagnostics.csv").read_text()


def test_cocycle_csv_header(tmp_path):
    run_scenario(SCEN / "cocycle_table.json", tmp_path)
    assert (tmp_path / "cocycle.csv").read_text().splitlines()[0] == "field_i,field_j,c_value"


def test_list_and_bad_flag(capsys):
    assert main(["list"]) == 0
    assert "torus_loop" in capsys.readouterr().out
    with pytest.raises(SystemExit) as exc:
        main(["run", "--bogus"])
    assert exc.value.code == 2


def test_check_suite(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("GRASSFLOW_THREADS", "2")
    assert main(["check", "--suite", "tilde", "--out-dir", str(tmp_path)]) == 0
    assert capsys.readouterr().out.split()[:3] == ["[PASS]", "criterion", "9"]
    assert (tmp_path / "check_tilde.json").exists()
