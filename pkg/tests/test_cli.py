import json

import pytest

from dynsplit.cli import main
from dynsplit.scenario import default_scenario_text


def test_validate_ok(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "727072" in out and "MISMATCH" not in out


def test_validate_mismatch(tmp_path, capsys):
    p = tmp_path / "ops.json"
    p.write_text(json.dumps({"functions": {"FFT_UL": 1}}))
    assert main(["validate", "--ops", str(p)]) == 1
    assert "MISMATCH" in capsys.readouterr().out


@pytest.mark.parametrize("text", ["{not json", json.dumps({"functions": {"FFT": 3}}), json.dumps({"functions": {"FFT_UL": "x"}})])
def test_validate_malformed(tmp_path, text):
    p = tmp_path / "ops.json"
    p.write_text(text)
    assert main(["validate", "--ops", str(p)]) == 2


def test_run_default(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("yes") == 8
    assert {p.name for p in tmp_path.iterdir()} == {
        "splits.csv", "objective.csv", "fh_dl.csv", "fh_ul.csv", "pct_diff.csv", "result.json",
    }
    splits = (tmp_path / "splits.csv").read_text()
    for bad in ("S8", "S7a", "S7d", "S6"):
        assert f",{bad}," not in splits


def test_run_greedy_records_method(tmp_path):
    assert main(["run", "--method", "greedy", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "result.json").read_text())["metadata"]["method"] == "greedy"


def test_run_missing_file(tmp_path, capsys):
    assert main(["run", "--scenario", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2
    assert "nope.json" in capsys.readouterr().err


def test_run_bad_scenario(tmp_path, capsys):
    doc = json.loads(default_scenario_text())
    doc["periods"] = []
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc))
    assert main(["run", "--scenario", str(p), "--out", str(tmp_path)]) == 2
    assert "periods" in capsys.readouterr().err


def test_run_flags_override(tmp_path):
    assert main(["run", "--capacity", "inf", "--epsilon", "3", "--format", "json", "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "result.json").read_text())
    assert res["metadata"]["epsilon"] == 3 and res["metadata"]["capacity_gbps"] is None
    assert all(p["splits"] == ["S8"] * 3 for p in res["periods"])
    assert main(["run", "--epsilon", "0.5", "--out", str(tmp_path)]) == 2


def _sweep(capsys, *args):
    assert main(["sweep", *args]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, l.split(","))) for l in lines[1:]]


def test_sweep_epsilon_one_ties_all_feasible(capsys):
    from dynsplit.optimizer import exhaustive_search, Objective
    from dynsplit.scenario import default_scenario

    sc = default_scenario()
    n_feasible = sum(
        exhaustive_search(sc.cells, sc.occupancies(p), Objective(1.0), sc.link).n_feasible for p in sc.periods
    )
    rows = _sweep(capsys, "--param", "epsilon", "--range", "1:4:0.5")
    assert len(rows) == 7
    assert int(rows[0]["tie_count"]) == n_feasible


def test_sweep_capacity_monotone(capsys):
    rows = _sweep(capsys, "--param", "capacity", "--values", "15,20,30,40,60,100,200,1000")
    objs = [float(r["objective_gops"]) for r in rows]
    assert all(a >= b for a, b in zip(objs, objs[1:]))
    assert rows[-1]["n_S8"] == "24"


def test_sweep_load_scale_to_file(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--param", "load_scale", "--values", "0.1,0.3", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3


def test_sweep_empty_range():
    assert main(["sweep", "--param", "epsilon", "--values", ","]) == 2
    assert main(["sweep", "--param", "epsilon", "--range", "3:1:1"]) == 2


def test_replay_writes_events(tmp_path, capsys):
    out = tmp_path / "ev.jsonl"
    assert main(["replay", "--hysteresis", "0", "--out", str(out)]) == 0
    assert "switches=5" in capsys.readouterr().out
    assert len(out.read_text().splitlines()) > 0


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit):
        main(["run", "--help"])
    out = capsys.readouterr().out
    for flag in ("--scenario", "--method", "--out", "--epsilon", "--capacity", "--format"):
        assert flag in out
