from functools import lru_cache

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from loguru import logger

from lab.procurement import config
from lab.procurement.backtest import (
    STRATEGIES,
    compute_hedges,
    ingested_hedges,
    load_dataset,
    run_backtest,
)
from lab.procurement.distributions import ErrorModel
from lab.procurement.errors import InvalidArgumentError, ProcurementError
from lab.procurement.expectation import ExpectationInputs, expected_components
from lab.procurement.optimizer import GridSpec, expected_cost_surface
from lab.procurement.reporting import round_yen, to_jsonable

app = FastAPI(
    title="Electricity Procurement Lab API",
    description="Expected procurement cost, hedge surfaces and dataset backtests.",
    version="1.0.0"
)

# Enable CORS for Frontend
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@lru_cache(maxsize=4)
def _dataset(fixture):
    return load_dataset(fixture)


def _http_error(exc):
    status = 422 if isinstance(exc, InvalidArgumentError) else 400
    logger.warning(f"request rejected: {exc}")
    return HTTPException(status_code=status, detail=str(exc))


@app.get("/")
def health_check():
    return {"status": "active", "strategies": list(STRATEGIES)}

# --- Expectation ---

@app.get("/api/expectation")
def get_expectation(
    f: float = 100.0,
    sigma1: float = 3 ** 0.5,
    sigma2: float = 2 ** 0.5,
    a: float = 1.0,
    b: float = 2.0,
    c: float = 3.0,
    A: float = 0.0,
    B: float = 0.0,
):
    """
    E[C] and its three components for one hedge pair.
    """
    try:
        inputs = ExpectationInputs(
            Ea=a, Eb=b, Ec=c, Eg=f, A=A, B=B,
            pg=ErrorModel.normal(sigma1), ph=ErrorModel.normal(sigma2),
        )
        c1, c2, c3 = expected_components(inputs)
    except ProcurementError as exc:
        raise _http_error(exc)
    return {"expected_total": c1 + c2 + c3, "components": {"c1": c1, "c2": c2, "c3": c3}}


@app.get("/api/surface")
def get_surface(
    f: float = 100.0,
    sigma1: float = 3 ** 0.5,
    sigma2: float = 2 ** 0.5,
    a: float = 1.0,
    b: float = 2.0,
    c: float = 3.0,
    a_min: float = config.STANDARD_GRID["a_min"],
    a_max: float = config.STANDARD_GRID["a_max"],
    b_min: float = config.STANDARD_GRID["b_min"],
    b_max: float = config.STANDARD_GRID["b_max"],
    mesh: float = Query(config.STANDARD_GRID["mesh"], gt=0),
):
    """
    E[C] over a grid of (A, B), with its argmin.
    """
    try:
        grid = GridSpec(a_min, a_max, b_min, b_max, mesh)
        report = expected_cost_surface(a, b, c, ErrorModel.normal(sigma1), ErrorModel.normal(sigma2), grid, Eg=f)
    except ProcurementError as exc:
        raise _http_error(exc)
    return to_jsonable(report.to_dict())

# --- Backtest ---

@app.get("/api/backtest/{strategy}")
def get_backtest(strategy: str, fixture: str = "paper", hedges: str = "paper"):
    """
    Replays the dataset under one strategy and returns per-period costs.
    """
    if strategy not in STRATEGIES:
        raise HTTPException(status_code=404, detail=f"unknown strategy {strategy!r}")
    if hedges not in ("paper", "recompute"):
        raise HTTPException(status_code=422, detail="hedges must be 'paper' or 'recompute'")
    try:
        ds = _dataset(fixture)
        table = None
        if strategy == "optimized":
            table = ingested_hedges(ds) if hedges == "paper" else compute_hedges(ds)
        ledger = run_backtest(ds, strategy, table)
    except ProcurementError as exc:
        raise _http_error(exc)
    return {
        "strategy": strategy,
        "total": ledger.total,
        "total_yen": round_yen(ledger.total),
        "periods": to_jsonable(ledger.to_frame()),
    }


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
