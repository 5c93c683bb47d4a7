"""
Expected-cost hedging for electricity bought day-ahead, topped up intra-day
and settled at a penalty price for any remaining shortfall.
"""

from lab.procurement.cost_model import CostBreakdown, PriceTriple, ProcurementParams, total_cost
from lab.procurement.distributions import DifferenceModel, ErrorModel, RandomStream
from lab.procurement.errors import (
    DatasetError,
    GridEvaluationError,
    InvalidArgumentError,
    ProcurementError,
    UnsupportedPathError,
)
from lab.procurement.expectation import ExpectationInputs, McEstimate, expected_total, monte_carlo
from lab.procurement.optimizer import GridSpec, SurfaceReport, grid_search, optimal_parameters

__all__ = [
    "CostBreakdown",
    "DatasetError",
    "DifferenceModel",
    "ErrorModel",
    "ExpectationInputs",
    "GridEvaluationError",
    "GridSpec",
    "InvalidArgumentError",
    "McEstimate",
    "PriceTriple",
    "ProcurementError",
    "ProcurementParams",
    "RandomStream",
    "SurfaceReport",
    "UnsupportedPathError",
    "expected_total",
    "grid_search",
    "monte_carlo",
    "optimal_parameters",
    "total_cost",
]
