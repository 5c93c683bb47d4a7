import json

import pytest

from lab.procurement.cli import COMMANDS, main
from lab.procurement.reporting import round_yen


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ============================================================================
# Parsing and exit codes
# ============================================================================

@pytest.mark.parametrize("command", sorted(COMMANDS))
def test_help_for_every_command(capsys, command):
    code, out, _ = run(capsys, command, "--help")
    assert code == 0
    assert "--format" in out


def test_top_level_help(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    for command in COMMANDS:
        assert command in out


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "expect", "--gamma", "1")
    assert code == 2
    assert "unrecognized arguments" in err


def test_missing_command_is_usage_error(capsys):
    assert run(capsys)[0] == 2


def test_invalid_sigma_is_data_error(capsys):
    code, out, err = run(capsys, "expect", "--sigma1", "0")
    assert code == 1
    assert out == ""
    assert "sigma" in err


def test_unknown_scenario_is_data_error(capsys):
    code, _, err = run(capsys, "scenarios", "--only", "nope", "--no-variance")
    assert code == 1
    assert "nope" in err


def test_bad_scenario_config_is_data_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x", "grid": {"a_min": 0, "a_max": 1, "b_min": -1, "b_max": 0, "step": 0.5}}')
    code, _, err = run(capsys, "scenarios", "--config", str(bad), "--no-variance")
    assert code == 1
    assert "step" in err
    code, _, _ = run(capsys, "scenarios", "--config", str(tmp_path / "absent.json"), "--no-variance")
    assert code == 1


# ============================================================================
# Commands
# ============================================================================

def test_expect_base_conditions(capsys):
    code, out, _ = run(capsys, "expect", "--A", "0.6", "--B", "-2")
    assert code == 0
    doc = json.loads(out)
    assert doc["expected_total"] == pytest.approx(101.835, abs=0.005)
    assert sum(doc["components"].values()) == pytest.approx(doc["expected_total"], rel=1e-15)
    assert doc["inputs"]["A"] == 0.6


def test_expect_quadrature_inner_agrees(capsys):
    _, closed, _ = run(capsys, "expect")
    _, nested, _ = run(capsys, "expect", "--inner", "quad")
    assert json.loads(nested)["expected_total"] == pytest.approx(json.loads(closed)["expected_total"], rel=1e-7)


def test_simulate_output_is_deterministic(capsys):
    argv = ("simulate", "--A", "0.6", "--B", "-2", "--mc-n", "20000", "--seed", "4")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv, "--threads", "3")
    assert first == second
    doc = json.loads(first)
    assert doc["n"] == 20000
    assert doc["mean"] == pytest.approx(101.835, abs=0.1)


def test_simulate_histogram_csv(capsys):
    code, out, _ = run(capsys, "simulate", "--mc-n", "5000", "--bin-width", "0.5", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "low,count"
    assert sum(int(line.split(",")[1]) for line in lines[1:]) == 5000


def test_optimize_base_and_inverted_prices(capsys):
    _, out, _ = run(capsys, "optimize")
    doc = json.loads(out)
    assert (doc["A"], doc["B"]) == pytest.approx((0.6, -2.0), abs=1e-9)
    _, out, _ = run(capsys, "optimize", "--a", "3", "--b", "2", "--c", "1")
    doc = json.loads(out)
    assert (doc["A"], doc["B"]) == (0.0, 0.0)


def test_surface_csv(capsys):
    code, out, _ = run(
        capsys, "surface", "--format", "csv",
        "--a-min", "0", "--a-max", "0.2", "--b-min", "-1", "--b-max", "-0.9",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "A,B,value"
    assert len(lines) == 1 + 3 * 2


def test_out_writes_file(capsys, tmp_path):
    target = tmp_path / "reports" / "expect.json"
    code, out, _ = run(capsys, "expect", "--out", str(target))
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["expected_total"] == pytest.approx(102.329, abs=0.005)


def test_backtest_perfect(capsys):
    code, out, _ = run(capsys, "backtest", "--fixture", "paper", "--strategy", "perfect")
    assert code == 0
    doc = json.loads(out)
    assert doc["total_yen"] == 51140.72
    assert doc["hedges"] is None


def test_backtest_all_strategies(capsys):
    code, out, _ = run(capsys, "backtest", "--strategy", "all")
    assert code == 0
    doc = json.loads(out)
    deltas = doc["comparison"]["deltas"]
    assert doc["comparison"]["baseline"] == "naive"
    assert deltas["optimized"]["delta"] == pytest.approx(-276.02, abs=0.10)
    assert doc["versus_perfect"]["deltas"]["optimized"]["delta"] == pytest.approx(809.23, abs=0.10)
    assert doc["price_ordering"]["actual"]["cells"] == 133


def test_backtest_json_carries_periods(capsys):
    code, out, _ = run(capsys, "backtest", "--strategy", "all")
    assert code == 0
    entries = {entry["strategy"]: entry for entry in json.loads(out)["strategies"]}
    assert set(entries) == {"optimized", "naive", "perfect"}
    for entry in entries.values():
        periods = entry["periods"]
        assert len(periods) == 133
        assert (periods[0]["t"], periods[0]["d"]) == (20, 1)
        assert sum(p["total"] for p in periods) == pytest.approx(entry["total"], rel=1e-12)
    assert all(p["A"] == 0 and p["B"] == 0 for p in entries["naive"]["periods"])


def test_backtest_unknown_data_directory(capsys, tmp_path):
    code, _, _ = run(capsys, "backtest", "--data", str(tmp_path / "missing"))
    assert code == 1


def test_scenarios_directions(capsys):
    code, out, _ = run(capsys, "scenarios", "--only", "base", "c_3.5", "--no-variance")
    assert code == 0
    doc = json.loads(out)
    assert [r["name"] for r in doc["results"]] == ["base", "c_3.5"]
    (row,) = doc["directions"]
    assert (row["A"], row["B"]) == ("increase", "increase")


# ============================================================================
# Yen rounding
# ============================================================================

@pytest.mark.parametrize("value, expected", [
    (0.125, 0.13),
    (2.675, 2.68),
    (-0.125, -0.13),
    (51140.7249, 51140.72),
])
def test_round_yen_half_up(value, expected):
    assert round_yen(value) == expected
