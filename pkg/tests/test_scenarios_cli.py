import csv
import json
import math

import numpy as np
import pytest

from gestalt_nash import validate_game
from gestalt_nash.cli import main
from gestalt_nash.report import emit_report, run_scenario, summary_dict
from gestalt_nash.scenarios import (
    BUILTINS,
    ConfigError,
    ScenarioError,
    build_scenario,
    builtin_config,
    load_config,
    resolve_config,
)


def write_json(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


def test_homogeneous_defaults():
    game, labels = build_scenario(resolve_config({"kind": "homogeneous"}))
    assert game.influence[0, 0] == 20 and game.influence[0, 1] == 1
    assert game.returns[0] == 25 and np.all(game.budgets == 3)
    assert labels is None


def test_heterogeneous_sine_agent_five():
    game, _ = build_scenario(resolve_config({"kind": "heterogeneous-sine"}))
    assert game.influence[4, 4] == pytest.approx(3 * math.sin(5) + 20)
    assert game.influence[4, 4] == pytest.approx(17.123, abs=1e-3)
    assert game.returns[4] == 25


def test_two_group_layout():
    game, labels = build_scenario(resolve_config({"kind": "two-group"}))
    assert game.n_agents == 15
    assert np.all(game.returns[:5] == 40) and np.all(game.returns[5:] == 25)
    assert labels == ["G1"] * 5 + ["G2"] * 10


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_builtins_are_valid(name):
    game, _ = build_scenario(resolve_config(builtin_config(name)))
    assert validate_game(game).ok


def test_custom_scenario():
    cfg = {"kind": "custom", "parameters": {
        "influence": [[3, 1], [1, 3]], "returns": [1, 2], "group_labels": ["a", "b"]}}
    game, labels = build_scenario(resolve_config(cfg))
    assert game.n_agents == 2 and labels == ["a", "b"]


@pytest.mark.parametrize("raw, field", [
    ({"kind": "homogeneous", "bogus": 1}, "bogus"),
    ({"kind": "triangle"}, "kind"),
    ({"kind": "homogeneous", "solver": {"outer_tol": -1}}, "solver.outer_tol"),
    ({"kind": "homogeneous", "solver": {"speed": 2}}, "solver.speed"),
    ({"kind": "homogeneous", "parameters": {"n_agents": 2.5}}, "parameters.n_agents"),
    ({"kind": "heterogeneous-sine", "parameters": {"self_base": "x"}}, "parameters.self_base"),
    ({"kind": "custom", "parameters": {"returns": [1]}}, "parameters.influence"),
    ({"kind": "custom", "parameters": {"influence": [[1, 0]], "returns": [1]}},
     "parameters.influence"),
    ({"kind": "homogeneous", "schema_version": 7}, "schema_version"),
    ({"kind": "homogeneous", "solver": {"budget_mode": "alpha"}}, "solver.alphas"),
])
def test_config_errors_name_field(raw, field):
    with pytest.raises(ConfigError) as info:
        resolve_config(raw)
    assert str(info.value).startswith(field)


def test_invalid_game_raises_scenario_error():
    cfg = resolve_config({"kind": "custom", "parameters": {
        "influence": [[1, 2], [0, 1]], "returns": [1, 1]}})
    with pytest.raises(ScenarioError, match="row 1 not diagonally dominant"):
        build_scenario(cfg)


def test_malformed_json_reports_position(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "kind": "homogeneous",\n  oops\n}', encoding="utf-8")
    with pytest.raises(ConfigError, match="line 3 column 3"):
        load_config(path)
    assert main(["solve", str(path)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_cli_validate_non_dominant(tmp_path, capsys):
    path = write_json(tmp_path / "g.json", {"kind": "custom", "parameters": {
        "influence": [[1, 2], [0, 1]], "returns": [1, 1]}})
    assert main(["validate", str(path)]) == 1
    assert "row 1 not diagonally dominant" in capsys.readouterr().err
    ok = write_json(tmp_path / "h.json", builtin_config("homogeneous"))
    assert main(["validate", str(ok)]) == 0


def test_cli_missing_file(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nope.json")]) == 1
    assert "nope.json" in capsys.readouterr().err


def test_cli_scenario_emits_config(tmp_path, capsys):
    assert main(["scenario", "two-group-b8"]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["parameters"]["budget"] == 8.0
    assert cfg["phenomena"]["baseline_budget"] == 3.0
    assert main(["scenario", "homogeneous", "--out", str(tmp_path), "--quiet"]) == 0
    assert (tmp_path / "homogeneous.json").exists()


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_cli_solve_homogeneous(tmp_path, capsys):
    cfg = write_json(tmp_path / "homogeneous.json", builtin_config("homogeneous"))
    out = tmp_path / "out"
    assert main(["solve", str(cfg), "--out", str(out), "--trace"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert np.allclose(summary["u_star"], 25 / 17, atol=1e-6)
    rows = read_rows(out / "cognition.csv")
    assert len(rows) == 10
    assert rows[0][0] == "0" and rows[0][1:] == ["0.333333333333"] * 9
    full = json.loads((out / "summary.json").read_text())
    assert full["rounds"] >= 1 and full["converged"] and full["verification"]["ok"]
    trace = read_rows(out / "u_trace.csv")
    assert trace[0] == ["round"] + [f"u{i}" for i in range(1, 11)]
    q = read_rows(out / "q_trace_agent1.csv")
    assert q[0] == ["iteration", "q"] and len(q) > 2
    raw = (out / "u_trace.csv").read_bytes()
    assert raw.endswith(b"\n") and b"\r" not in raw


def test_cli_csv_format(tmp_path, capsys):
    cfg = write_json(tmp_path / "h.json", builtin_config("homogeneous"))
    assert main(["solve", str(cfg), "--format", "csv"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["agent", "u", "alpha", "rbp"]
    assert float(rows[1][1]) == pytest.approx(25 / 17)


def test_cli_non_convergence_exit_code(tmp_path):
    raw = builtin_config("homogeneous")
    raw["solver"]["max_rounds"] = 1
    cfg = write_json(tmp_path / "h.json", raw)
    assert main(["solve", str(cfg), "--quiet"]) == 2


def test_cli_verification_failure_exit_code(tmp_path, monkeypatch):
    import gestalt_nash.report as report_mod
    from gestalt_nash.engine import VerificationReport

    def failing(*args, **kwargs):
        return VerificationReport(False, 1.0, [], ["forced"], 0, 0)

    monkeypatch.setattr(report_mod, "verify_gne", failing)
    cfg = write_json(tmp_path / "h.json", builtin_config("homogeneous"))
    assert main(["solve", str(cfg), "--quiet"]) == 3


def test_two_group_b8_cognition_row(tmp_path):
    report = run_scenario(resolve_config(builtin_config("two-group-b8")))
    emit_report(report, tmp_path)
    row = [float(x) for x in read_rows(tmp_path / "cognition.csv")[10]]
    assert np.allclose(row[:5], 1.0, atol=1e-6)
    peers = [x for k, x in enumerate(row[5:], start=5) if k != 10]
    assert np.allclose(peers, 1 / 3, atol=1e-6)
    assert report.phenomena.as_dict()["fill_set"] == list(range(6, 16))


def test_config_echo_round_trip(tmp_path):
    spec = resolve_config(builtin_config("heterogeneous"))
    first = run_scenario(spec, seed=4)
    emit_report(first, tmp_path / "a")
    again = run_scenario(resolve_config(first.config_echo))
    emit_report(again, tmp_path / "b")
    a = (tmp_path / "a" / "summary.json").read_bytes()
    b = (tmp_path / "b" / "summary.json").read_bytes()
    assert a == b
    assert summary_dict(first)["phenomena"]["critical_set"] == [5, 9, 10]


def test_unwritable_output_reports_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    report = run_scenario(resolve_config(builtin_config("homogeneous")))
    with pytest.raises(OSError, match="file"):
        emit_report(report, blocker / "sub")
