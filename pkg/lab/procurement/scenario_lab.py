"""
Synthetic experiments: the base procurement conditions and their one-factor variations.

Base conditions: f = 100, sigma1 = sqrt(3), sigma2 = sqrt(2), a = 1, b = 2, c = 3.
Each run yields an E[C] surface (quadrature) and a V[C] surface (Monte Carlo).
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from loguru import logger

from lab.procurement import config
from lab.procurement.distributions import ErrorModel
from lab.procurement.errors import InvalidArgumentError
from lab.procurement.expectation import ExpectationInputs, expected_total, monte_carlo
from lab.procurement.optimizer import GridSpec, expected_cost_surface, surface_from_values

BASE_NAME = "base"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    f: float = 100.0
    sigma1: float = math.sqrt(3.0)
    sigma2: float = math.sqrt(2.0)
    a: float = 1.0
    b: float = 2.0
    c: float = 3.0
    grid: GridSpec = field(default_factory=GridSpec.standard)
    mc_n: int = config.DEFAULT_MC_N
    seed: int = config.DEFAULT_SEED
    description: str = ""

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise InvalidArgumentError(f"{self.name}: sigma1 and sigma2 must be > 0")
        if int(self.mc_n) != self.mc_n or self.mc_n < 2:
            raise InvalidArgumentError(f"{self.name}: mc_n must be an integer >= 2")
        for key in ("f", "a", "b", "c"):
            if not math.isfinite(getattr(self, key)):
                raise InvalidArgumentError(f"{self.name}: {key} must be finite")

    def inputs(self, A=0.0, B=0.0):
        return ExpectationInputs(
            Ea=self.a, Eb=self.b, Ec=self.c, Eg=self.f, A=float(A), B=float(B),
            pg=ErrorModel.normal(self.sigma1), ph=ErrorModel.normal(self.sigma2),
        )

    def as_dict(self):
        return {
            "name": self.name,
            "f": self.f,
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "grid": self.grid.as_dict(),
            "mc_n": self.mc_n,
            "seed": self.seed,
            "description": self.description,
        }


def builtin_scenarios(mc_n=config.DEFAULT_MC_N, seed=config.DEFAULT_SEED):
    base = ScenarioConfig(BASE_NAME, mc_n=mc_n, seed=seed, description="standard conditions")
    wide = GridSpec.standard()
    return (
        base,
        replace(base, name="sigma1_5", sigma1=5.0, grid=wide,
                description="precision of previous-day demand prediction decreases"),
        replace(base, name="sigma2_0.1", sigma2=0.1, grid=GridSpec(-1.9, 3.0, -1.9, 3.0, 0.1),
                description="precision of same-day demand prediction increases"),
        replace(base, name="b_1.2", b=1.2, grid=GridSpec(-1.9, 3.0, -2.9, 2.0, 0.1),
                description="intra-day unit price approaches day-ahead unit price"),
        replace(base, name="b_2.8", b=2.8, grid=wide,
                description="intra-day unit price approaches penalty unit price"),
        replace(base, name="a_0.5", a=0.5, grid=GridSpec(-0.9, 3.0, -4.9, 0.0, 0.1),
                description="day-ahead unit price decreases"),
        replace(base, name="c_3.5", c=3.5, grid=wide,
                description="penalty unit price increases"),
    )


_GRID_KEYS = frozenset(GridSpec.__dataclass_fields__)


def _grid_from_dict(name, grid):
    if not isinstance(grid, dict):
        raise InvalidArgumentError(f"scenario {name!r}: grid must be an object")
    unknown = set(grid) - _GRID_KEYS
    missing = _GRID_KEYS - set(grid)
    if unknown or missing:
        raise InvalidArgumentError(
            f"scenario {name!r}: grid keys unknown {sorted(unknown)}, missing {sorted(missing)}"
        )
    return GridSpec(**grid)


def _config_from_dict(raw):
    if not isinstance(raw, dict):
        raise InvalidArgumentError(f"scenario entries must be objects, got {type(raw).__name__}")
    raw = dict(raw)
    if "name" not in raw:
        raise InvalidArgumentError("scenario entries need a name")
    grid = raw.pop("grid", None)
    known = set(ScenarioConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise InvalidArgumentError(f"scenario {raw['name']!r}: unknown keys {sorted(unknown)}")
    try:
        if grid is not None:
            raw["grid"] = _grid_from_dict(raw["name"], grid)
        return ScenarioConfig(**raw)
    except InvalidArgumentError:
        raise
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"scenario {raw['name']!r}: {exc}") from exc


def load_scenarios(path):
    """Scenario configs from a JSON file holding one object or a list of them."""
    try:
        document = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"scenario file {path} is not valid JSON: {exc}") from exc
    entries = document if isinstance(document, list) else [document]
    return tuple(_config_from_dict(entry) for entry in entries)


# ==========================================
# RUNS
# ==========================================

def variance_surface(cfg, *, threads=1):
    """V[C] on every cell, one Monte Carlo stream per cell (stream id = flat cell index)."""
    grid = cfg.grid
    a_values, b_values = grid.a_values(), grid.b_values()
    n_b = len(b_values)

    def cell(flat):
        i, j = divmod(flat, n_b)
        estimate = monte_carlo(cfg.inputs(a_values[i], b_values[j]), cfg.mc_n, cfg.seed, stream_id=flat)
        return estimate.unbiased_variance

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        values = list(pool.map(cell, range(len(a_values) * n_b)))
    return surface_from_values(grid, np.array(values).reshape(grid.shape), kind="variance")


@dataclass(frozen=True)
class ScenarioResult:
    config: ScenarioConfig
    expectation: object
    variance: object = None
    comparison: dict = None
    variance_ratio: float = None

    def summary(self):
        doc = {
            "name": self.config.name,
            "description": self.config.description,
            "e_argmin": {"A": self.expectation.argmin[0], "B": self.expectation.argmin[1]},
            "e_min": self.expectation.min_value,
        }
        if self.variance is not None:
            doc["v_argmin"] = {"A": self.variance.argmin[0], "B": self.variance.argmin[1]}
            doc["v_min"] = self.variance.min_value
        if self.comparison is not None:
            doc["comparison"] = self.comparison
            doc["variance_ratio"] = self.variance_ratio
        return doc


def _point(cfg, A, B, stream_id):
    inputs = cfg.inputs(A, B)
    return {
        "A": float(A),
        "B": float(B),
        "E": expected_total(inputs),
        "V": monte_carlo(inputs, cfg.mc_n, cfg.seed, stream_id=stream_id).unbiased_variance,
    }


def run_scenario(cfg, *, with_variance=True, threads=1):
    """
    E surface by quadrature and, optionally, V surface by Monte Carlo.

    With variance, the result also compares E and V at (0, 0), at the E-argmin
    and at the V-argmin (streams after the last grid cell).
    """
    pg, ph = ErrorModel.normal(cfg.sigma1), ErrorModel.normal(cfg.sigma2)
    e_surface = expected_cost_surface(cfg.a, cfg.b, cfg.c, pg, ph, cfg.grid, Eg=cfg.f)
    logger.info(f"{cfg.name}: E argmin {e_surface.argmin} min {e_surface.min_value:.4f}")
    if not with_variance:
        return ScenarioResult(cfg, e_surface)

    v_surface = variance_surface(cfg, threads=threads)
    logger.info(f"{cfg.name}: V argmin {v_surface.argmin} min {v_surface.min_value:.6f}")

    first_free = int(np.prod(cfg.grid.shape))
    comparison = {
        "origin": _point(cfg, 0.0, 0.0, first_free),
        "e_argmin": _point(cfg, *e_surface.argmin, first_free + 1),
        "v_argmin": _point(cfg, *v_surface.argmin, first_free + 2),
    }
    v_min = comparison["v_argmin"]["V"]
    comparison["ratio_to_v_min"] = {
        "origin": comparison["origin"]["V"] / v_min,
        "e_argmin": comparison["e_argmin"]["V"] / v_min,
    }
    ratio = comparison["origin"]["V"] / comparison["e_argmin"]["V"]
    return ScenarioResult(cfg, e_surface, v_surface, comparison, ratio)


def run_scenarios(configs, *, with_variance=True, threads=1):
    return [run_scenario(cfg, with_variance=with_variance, threads=threads) for cfg in configs]


def _direction(value, reference, tol):
    if value > reference + tol:
        return "increase"
    if value < reference - tol:
        return "decrease"
    return "unchanged"


def direction_table(results, base_name=BASE_NAME):
    """
    How the E-optimal (A, B) moves relative to the base scenario.

    One row per non-base scenario: description, A direction, B direction.
    """
    by_name = {r.config.name: r for r in results}
    if base_name not in by_name:
        raise InvalidArgumentError(f"direction_table needs the {base_name!r} scenario")
    base = by_name[base_name].expectation
    rows = []
    for result in results:
        if result.config.name == base_name:
            continue
        tol = 0.5 * min(result.config.grid.mesh, base.grid.mesh)
        A, B = result.expectation.argmin
        rows.append({
            "scenario": result.config.name,
            "description": result.config.description,
            "A": _direction(A, base.argmin[0], tol),
            "B": _direction(B, base.argmin[1], tol),
        })
    return rows
