"""
Exhaustive grid search over the hedge pair (A, B).

Cells sit at a_min + i * mesh and b_min + j * mesh (one multiplication each,
no accumulated drift). Ties resolve to the smaller A, then the smaller B.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd
from loguru import logger

from lab.procurement import config
from lab.procurement.errors import GridEvaluationError, InvalidArgumentError, UnsupportedPathError
from lab.procurement.expectation import expected_total_surface

# slack when converting a span into a cell count
_SPAN_EPS = 1e-9


# ==========================================
# 1. GRID
# ==========================================

@dataclass(frozen=True)
class GridSpec:
    a_min: float
    a_max: float
    b_min: float
    b_max: float
    mesh: float

    def __post_init__(self):
        values = (self.a_min, self.a_max, self.b_min, self.b_max, self.mesh)
        if not all(math.isfinite(v) for v in values):
            raise InvalidArgumentError(f"grid bounds must be finite, got {values!r}")
        if self.mesh <= 0:
            raise InvalidArgumentError(f"mesh must be > 0, got {self.mesh!r}")
        if self.a_min > self.a_max or self.b_min > self.b_max:
            raise InvalidArgumentError(
                f"empty grid: A in [{self.a_min}, {self.a_max}], B in [{self.b_min}, {self.b_max}]"
            )

    @classmethod
    def standard(cls):
        return cls(**config.STANDARD_GRID)

    @classmethod
    def centered(cls, half_width, mesh, a_fixed=None, b_fixed=None):
        """
        Square window around (0, 0) whose edges fall on multiples of mesh.

        a_fixed / b_fixed collapse that axis to a single value.
        """
        if not (math.isfinite(half_width) and half_width > 0):
            raise InvalidArgumentError(f"half_width must be > 0, got {half_width!r}")
        if not (math.isfinite(mesh) and mesh > 0):
            raise InvalidArgumentError(f"mesh must be > 0, got {mesh!r}")
        edge = math.ceil(half_width / mesh - _SPAN_EPS) * mesh
        a = (-edge, edge) if a_fixed is None else (a_fixed, a_fixed)
        b = (-edge, edge) if b_fixed is None else (b_fixed, b_fixed)
        return cls(a[0], a[1], b[0], b[1], mesh)

    def _count(self, lo, hi):
        return int(math.floor((hi - lo) / self.mesh + _SPAN_EPS)) + 1

    @property
    def shape(self):
        return self._count(self.a_min, self.a_max), self._count(self.b_min, self.b_max)

    def a_values(self):
        return self.a_min + np.arange(self.shape[0]) * self.mesh

    def b_values(self):
        return self.b_min + np.arange(self.shape[1]) * self.mesh

    def with_mesh(self, mesh):
        return GridSpec(self.a_min, self.a_max, self.b_min, self.b_max, mesh)

    def window(self, A, B, radius, mesh):
        """Sub-grid A +/- radius, B +/- radius clipped to this grid's bounds."""
        return GridSpec(
            max(self.a_min, A - radius), min(self.a_max, A + radius),
            max(self.b_min, B - radius), min(self.b_max, B + radius),
            mesh,
        )

    def as_dict(self):
        return {"a_min": self.a_min, "a_max": self.a_max, "b_min": self.b_min, "b_max": self.b_max, "mesh": self.mesh}


@dataclass(frozen=True)
class SurfaceReport:
    """Objective values on every grid cell plus the argmin."""
    grid: GridSpec
    values: np.ndarray
    argmin: tuple
    min_value: float
    kind: str = "expectation"

    def value_at(self, A, B):
        i = round((A - self.grid.a_min) / self.grid.mesh)
        j = round((B - self.grid.b_min) / self.grid.mesh)
        n_a, n_b = self.values.shape
        on_grid = (
            0 <= i < n_a and 0 <= j < n_b
            and abs(self.grid.a_min + i * self.grid.mesh - A) <= 1e-6 * self.grid.mesh
            and abs(self.grid.b_min + j * self.grid.mesh - B) <= 1e-6 * self.grid.mesh
        )
        if not on_grid:
            raise InvalidArgumentError(f"({A}, {B}) is not a cell of this grid")
        return float(self.values[i, j])

    def to_frame(self):
        AA, BB = np.meshgrid(self.grid.a_values(), self.grid.b_values(), indexing="ij")
        return pd.DataFrame({"A": AA.ravel(), "B": BB.ravel(), "value": self.values.ravel()})

    def to_csv(self, path=None):
        """Header A,B,value; one row per cell, A outer, B inner."""
        return self.to_frame().to_csv(path, index=False)

    def to_dict(self):
        return {
            "kind": self.kind,
            "grid": self.grid.as_dict(),
            "shape": list(self.values.shape),
            "argmin": {"A": float(self.argmin[0]), "B": float(self.argmin[1])},
            "min_value": float(self.min_value),
            "values": self.values.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def surface_from_values(grid, values, kind="expectation"):
    """Wrap a value matrix; argmin is the first minimum in row-major order."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise InvalidArgumentError(f"values shape {values.shape} does not match grid {grid.shape}")
    flat = int(np.argmin(values))
    i, j = np.unravel_index(flat, values.shape)
    argmin = (float(grid.a_values()[i]), float(grid.b_values()[j]))
    return SurfaceReport(grid=grid, values=values, argmin=argmin, min_value=float(values[i, j]), kind=kind)


# ==========================================
# 2. SEARCH
# ==========================================

def _cell(objective, A, B):
    try:
        value = float(objective(A, B))
    except Exception as exc:
        raise GridEvaluationError(A, B, exc) from exc
    if not math.isfinite(value):
        raise GridEvaluationError(A, B, InvalidArgumentError(f"objective returned {value!r}"))
    return value


def grid_search(objective, grid, *, vectorized=False, threads=1, kind="expectation"):
    """
    Evaluate objective on every cell of grid and report the argmin.

    vectorized=True passes meshgrid arrays (indexing="ij") in one call.
    Otherwise cells are evaluated one by one, rows spread over threads.
    """
    a_values, b_values = grid.a_values(), grid.b_values()

    if vectorized:
        AA, BB = np.meshgrid(a_values, b_values, indexing="ij")
        try:
            values = np.array(np.broadcast_to(np.asarray(objective(AA, BB), dtype=float), grid.shape))
        except GridEvaluationError:
            raise
        except Exception:
            # locate the failing cell
            for A in a_values:
                for B in b_values:
                    _cell(objective, float(A), float(B))
            raise
        bad = np.argwhere(~np.isfinite(values))
        if len(bad):
            i, j = bad[0]
            raise GridEvaluationError(
                float(a_values[i]), float(b_values[j]), InvalidArgumentError("objective returned a non-finite value")
            )
        return surface_from_values(grid, values, kind)

    def row(i):
        A = float(a_values[i])
        return [_cell(objective, A, float(B)) for B in b_values]

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        rows = list(pool.map(row, range(len(a_values))))
    return surface_from_values(grid, np.array(rows, dtype=float).reshape(grid.shape), kind)


def zoom_search(objective, grid, meshes=config.HEDGE_ZOOM_MESHES, *, vectorized=False, threads=1,
                kind="expectation"):
    """
    Multi-resolution grid search.

    The first mesh covers the whole grid; every finer mesh searches a window of
    +/- (previous mesh) around the incumbent. Returns the finest level's report.
    """
    if not meshes:
        raise InvalidArgumentError("zoom_search needs at least one mesh")
    level = grid.with_mesh(meshes[0])
    report = grid_search(objective, level, vectorized=vectorized, threads=threads, kind=kind)
    logger.debug(f"zoom mesh={meshes[0]} shape={level.shape} argmin={report.argmin}")
    for previous, mesh in zip(meshes, meshes[1:]):
        level = grid.window(report.argmin[0], report.argmin[1], previous, mesh)
        report = grid_search(objective, level, vectorized=vectorized, threads=threads, kind=kind)
        logger.debug(f"zoom mesh={mesh} shape={level.shape} argmin={report.argmin}")
    return report


# ==========================================
# 3. EXPECTED-COST OBJECTIVE
# ==========================================

def expected_cost_objective(Ea, Eb, Ec, pg, ph, Eg=0.0):
    """Vectorized E[C](A, B); offset-free when Eg = 0."""
    def objective(A, B):
        return expected_total_surface(Ea, Eb, Ec, Eg, A, B, pg, ph)
    return objective


def expected_cost_surface(Ea, Eb, Ec, pg, ph, grid, Eg=0.0):
    return grid_search(expected_cost_objective(Ea, Eb, Ec, pg, ph, Eg), grid, vectorized=True)


def constrained_grid(Ea, Eb, Ec, grid):
    """
    Apply the degenerate-price rules to a grid.

    Eb <= Ea collapses A to 0, Ec <= Eb collapses B to 0. Returns None when
    both hold (the answer is (0, 0) without search).
    """
    fix_a = Eb <= Ea
    fix_b = Ec <= Eb
    if fix_a and fix_b:
        return None
    if fix_a:
        return GridSpec(0.0, 0.0, grid.b_min, grid.b_max, grid.mesh)
    if fix_b:
        return GridSpec(grid.a_min, grid.a_max, 0.0, 0.0, grid.mesh)
    return grid


def optimal_parameters(Ea, Eb, Ec, pg, ph, grid, *, meshes=None):
    """
    Hedge pair minimizing E[C] under the degenerate-price rules.

    meshes switches from a single grid_search to zoom_search.
    """
    for name, price in (("Ea", Ea), ("Eb", Eb), ("Ec", Ec)):
        if not (math.isfinite(price) and price >= 0):
            raise InvalidArgumentError(f"{name} must be finite and >= 0, got {price!r}")
    if not (pg.has_density and ph.has_density):
        raise UnsupportedPathError("optimal_parameters needs normal error models")

    search = constrained_grid(Ea, Eb, Ec, grid)
    if search is None:
        return 0.0, 0.0
    objective = expected_cost_objective(Ea, Eb, Ec, pg, ph)
    if meshes:
        report = zoom_search(objective, search, meshes, vectorized=True)
    else:
        report = grid_search(objective, search, vectorized=True)
    A, B = report.argmin
    if search.a_min == search.a_max == 0.0:
        A = 0.0
    if search.b_min == search.b_max == 0.0:
        B = 0.0
    return A, B
