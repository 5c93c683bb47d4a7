import json
import math
from dataclasses import replace

import pytest

from lab.procurement.errors import InvalidArgumentError
from lab.procurement.optimizer import GridSpec
from lab.procurement.scenario_lab import (
    BASE_NAME,
    ScenarioConfig,
    ScenarioResult,
    builtin_scenarios,
    direction_table,
    load_scenarios,
    run_scenario,
    run_scenarios,
)

# published E-argmin and minimum per scenario on its own grid
EXPECTED_OPTIMA = {
    "base": ((0.6, -2.0), 101.835),
    "sigma1_5": ((0.8, -1.0), 104.6559),
    "sigma2_0.1": ((0.1, -0.1), 101.441),
    "b_1.2": ((-0.1, -0.5), 101.5671),
    "b_2.8": ((0.7, -3.9), 101.8878),
    "a_0.5": ((1.6, -2.5), 51.2869),
    "c_3.5": ((0.8, -1.6), 101.9741),
}

EXPECTED_DIRECTIONS = {
    "sigma1_5": ("increase", "increase"),
    "sigma2_0.1": ("decrease", "increase"),
    "b_1.2": ("decrease", "increase"),
    "b_2.8": ("increase", "decrease"),
    "a_0.5": ("increase", "decrease"),
    "c_3.5": ("increase", "increase"),
}


@pytest.fixture(scope="module")
def expectation_results():
    return run_scenarios(builtin_scenarios(), with_variance=False)


# ============================================================================
# Configs
# ============================================================================

def test_builtin_scenarios():
    scenarios = builtin_scenarios(mc_n=1000, seed=5)
    assert [s.name for s in scenarios] == list(EXPECTED_OPTIMA)
    base = scenarios[0]
    assert base.name == BASE_NAME
    assert (base.f, base.a, base.b, base.c) == (100.0, 1.0, 2.0, 3.0)
    assert base.sigma1 == math.sqrt(3.0) and base.sigma2 == math.sqrt(2.0)
    assert all(s.mc_n == 1000 and s.seed == 5 for s in scenarios)
    assert all(s.description for s in scenarios)
    by_name = {s.name: s for s in scenarios}
    assert by_name["sigma2_0.1"].grid == GridSpec(-1.9, 3.0, -1.9, 3.0, 0.1)
    assert by_name["a_0.5"].grid.shape == (40, 50)


@pytest.mark.parametrize("kwargs", [
    {"sigma1": 0.0},
    {"sigma2": -1.0},
    {"mc_n": 1},
    {"mc_n": 10.5},
    {"c": math.inf},
])
def test_config_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        ScenarioConfig("bad", **kwargs)


def test_load_single_object(tmp_path):
    path = tmp_path / "one.json"
    path.write_text(json.dumps({
        "name": "tight",
        "sigma1": 0.5,
        "grid": {"a_min": 0.0, "a_max": 1.0, "b_min": -1.0, "b_max": 0.0, "mesh": 0.5},
    }))
    (cfg,) = load_scenarios(path)
    assert cfg.name == "tight"
    assert cfg.sigma1 == 0.5
    assert cfg.sigma2 == math.sqrt(2.0)
    assert cfg.grid.shape == (3, 3)


def test_load_list(tmp_path):
    path = tmp_path / "many.json"
    path.write_text(json.dumps([{"name": "x", "b": 1.5}, {"name": "y", "c": 4.0, "mc_n": 500}]))
    configs = load_scenarios(path)
    assert [c.name for c in configs] == ["x", "y"]
    assert configs[0].b == 1.5
    assert configs[1].mc_n == 500
    assert configs[1].grid == GridSpec.standard()


@pytest.mark.parametrize("entry", [{"name": "x", "price": 2.0}, {"sigma1": 2.0}])
def test_load_rejects_malformed_entries(tmp_path, entry):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(entry))
    with pytest.raises(InvalidArgumentError):
        load_scenarios(path)


@pytest.mark.parametrize("text", [
    '{"name": "x", "grid": {"a_min": 0, "a_max": 1, "b_min": -1, "b_max": 0, "step": 0.5}}',
    '{"name": "x", "grid": {"a_min": 0, "a_max": 1, "b_min": -1, "b_max": 0}}',
    '{"name": "x", "grid": [0, 1, -1, 0, 0.5]}',
    '{"name": "x", "sigma1": "wide"}',
    '["x"]',
    '{"name": "x",',
])
def test_load_wraps_bad_documents(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(InvalidArgumentError):
        load_scenarios(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(InvalidArgumentError, match="cannot read"):
        load_scenarios(tmp_path / "absent.json")


# ============================================================================
# Expected-cost optima
# ============================================================================

@pytest.mark.parametrize("name", list(EXPECTED_OPTIMA))
def test_expected_cost_optimum(expectation_results, name):
    result = next(r for r in expectation_results if r.config.name == name)
    (A, B), minimum = EXPECTED_OPTIMA[name]
    mesh = result.config.grid.mesh
    assert abs(result.expectation.argmin[0] - A) <= mesh + 1e-9
    assert abs(result.expectation.argmin[1] - B) <= mesh + 1e-9
    assert result.expectation.min_value == pytest.approx(minimum, abs=0.02)
    assert result.variance is None
    assert "v_argmin" not in result.summary()


def test_corners_above_minimum(expectation_results):
    for result in expectation_results:
        values = result.expectation.values
        corners = (values[0, 0], values[0, -1], values[-1, 0], values[-1, -1])
        assert min(corners) > result.expectation.min_value


def test_direction_table(expectation_results):
    rows = direction_table(expectation_results)
    assert [row["scenario"] for row in rows] == list(EXPECTED_DIRECTIONS)
    for row in rows:
        assert (row["A"], row["B"]) == EXPECTED_DIRECTIONS[row["scenario"]]
    descriptions = {row["scenario"]: row["description"] for row in rows}
    assert descriptions["c_3.5"] == "penalty unit price increases"


def test_direction_table_unchanged(expectation_results):
    base = expectation_results[0]
    twin = ScenarioResult(replace(base.config, name="twin"), base.expectation)
    (row,) = direction_table([base, twin])
    assert (row["A"], row["B"]) == ("unchanged", "unchanged")


def test_direction_table_needs_base(expectation_results):
    with pytest.raises(InvalidArgumentError):
        direction_table(expectation_results[1:])


# ============================================================================
# Variance runs
# ============================================================================

SMALL_GRID = GridSpec(0.5, 0.7, -2.1, -1.9, 0.1)


def test_small_variance_run_is_thread_independent():
    cfg = ScenarioConfig(BASE_NAME, grid=SMALL_GRID, mc_n=50_000, seed=3)
    serial = run_scenario(cfg, threads=1)
    threaded = run_scenario(cfg, threads=4)
    assert serial.variance.values.tolist() == threaded.variance.values.tolist()
    assert serial.comparison == threaded.comparison
    assert serial.expectation.argmin == pytest.approx((0.6, -2.0), abs=1e-9)
    assert 1.45 < serial.variance_ratio < 1.72


def test_comparison_layout():
    cfg = ScenarioConfig(BASE_NAME, grid=SMALL_GRID, mc_n=20_000, seed=1)
    result = run_scenario(cfg)
    comparison = result.comparison
    assert set(comparison) == {"origin", "e_argmin", "v_argmin", "ratio_to_v_min"}
    assert (comparison["origin"]["A"], comparison["origin"]["B"]) == (0.0, 0.0)
    assert comparison["origin"]["E"] == pytest.approx(102.329, abs=0.005)
    assert comparison["e_argmin"]["E"] == pytest.approx(result.expectation.min_value, rel=1e-7)
    assert result.variance_ratio == comparison["origin"]["V"] / comparison["e_argmin"]["V"]
    summary = result.summary()
    assert summary["v_argmin"] == {"A": result.variance.argmin[0], "B": result.variance.argmin[1]}


@pytest.mark.slow
def test_base_risk_comparison():
    cfg = builtin_scenarios()[0]
    result = run_scenario(cfg, threads=4)
    ratios = result.comparison["ratio_to_v_min"]
    assert ratios["origin"] == pytest.approx(1.70, abs=0.04)
    assert ratios["e_argmin"] == pytest.approx(1.076, abs=0.03)
    assert abs(result.variance.argmin[0] - 1.0) <= cfg.grid.mesh + 1e-9
    assert abs(result.variance.argmin[1] + 1.4) <= cfg.grid.mesh + 1e-9
