"""
Backtest on a (t, d)-indexed market dataset.

Tables are wide pandas frames: index = period t, columns = day d.
Pipeline:
    load_dataset -> predict_prices / estimate_sameday_variance / prevday_variance
    -> compute_hedges -> run_backtest per strategy -> compare_strategies
"""

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from lab.procurement import config
from lab.procurement.cost_model import PriceTriple, ProcurementParams, total_cost
from lab.procurement.distributions import ErrorModel
from lab.procurement.errors import DatasetError, InvalidArgumentError, UnsupportedPathError
from lab.procurement.optimizer import GridSpec, optimal_parameters
from lab.procurement.reporting import round_yen

FIXTURE_ROOT = Path(__file__).resolve().parent / "fixtures"
CHECKSUM_FILE = "SHA256SUMS"

PERIODS = tuple(range(20, 27))
DAYS = tuple(range(1, 20))

# Periods before this one are forecast as the cross-period mean of the same day;
# later periods as the cross-day mean of the same period.
CROSS_DAY_FROM = 25

# attribute -> file stem (table_<stem>.csv)
REQUIRED_TABLES = {
    "f": "demand",
    "g": "prevday_prediction",
    "h": "sameday_prediction",
    "a": "dayahead_price",
    "b": "intraday_price",
    "c": "penalty_price",
}
OPTIONAL_TABLES = {
    "v1": "prevday_variance",
    "a_opt": "hedge_a",
    "b_opt": "hedge_b",
}
FORECAST_TABLES = {
    "a": "dayahead_price_forecast",
    "b": "intraday_price_forecast",
    "c": "penalty_price_forecast",
}
SAMEDAY_VARIANCE_TABLE = "sameday_variance"

STRATEGIES = ("optimized", "naive", "perfect")


# ==========================================
# 1. DATASET
# ==========================================

@dataclass(frozen=True)
class MarketDataset:
    periods: tuple
    days: tuple
    f: pd.DataFrame
    g: pd.DataFrame
    h: pd.DataFrame
    a: pd.DataFrame
    b: pd.DataFrame
    c: pd.DataFrame
    v1: pd.DataFrame = None
    v2: pd.Series = None
    a_opt: pd.DataFrame = None
    b_opt: pd.DataFrame = None
    forecasts: dict = None
    source: str = ""

    def cells(self):
        """(t, d) pairs in ledger order: ascending d, then ascending t."""
        return [(t, d) for d in self.days for t in self.periods]

    def prices_at(self, t, d):
        return PriceTriple(float(self.a.at[t, d]), float(self.b.at[t, d]), float(self.c.at[t, d]))

    def params_at(self, t, d, A=0.0, B=0.0):
        return ProcurementParams(float(self.g.at[t, d]), float(self.h.at[t, d]), A, B)


def _sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def read_checksums(directory):
    """Parse a sha256sum-format manifest: '<hex>  <file name>' per line."""
    manifest = {}
    for line in (directory / CHECKSUM_FILE).read_text().splitlines():
        if not line.strip():
            continue
        digest, name = line.split(maxsplit=1)
        manifest[name.strip().lstrip("*")] = digest
    return manifest


def verify_checksums(directory):
    directory = Path(directory)
    manifest = read_checksums(directory)
    for name, digest in manifest.items():
        path = directory / name
        if not path.exists():
            raise DatasetError(f"{name} listed in {CHECKSUM_FILE} is missing")
        actual = _sha256(path)
        if actual != digest:
            raise DatasetError(f"checksum mismatch for {name}: expected {digest}, got {actual}")
    logger.debug(f"verified {len(manifest)} fixture checksums in {directory}")
    return manifest


def _read_rows(path, keys):
    columns = list(keys) + ["value"]
    try:
        frame = pd.read_csv(path, dtype=str)
    except pd.errors.EmptyDataError:
        frame = pd.DataFrame(columns=columns)
    if list(frame.columns) != columns:
        raise DatasetError(f"{path.name}: expected header {','.join(columns)}, got {','.join(map(str, frame.columns))}")

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric[numeric.isna().any(axis=1)]
    if len(bad):
        row = int(bad.index[0]) + 2
        raise DatasetError(f"{path.name}: non-numeric value on line {row}")
    for key in keys:
        if not np.all(np.mod(numeric[key], 1) == 0):
            raise DatasetError(f"{path.name}: column {key} must hold integers")
        numeric[key] = numeric[key].astype(int)

    dup = numeric[numeric.duplicated(list(keys), keep="first")]
    if len(dup):
        coords = tuple(int(v) for v in dup.iloc[0][list(keys)])
        raise DatasetError(f"{path.name}: duplicate cell {coords}")
    return numeric


def _read_table(path, periods, days):
    rows = _read_rows(path, ("t", "d"))
    present = set(zip(rows["t"], rows["d"]))
    missing = [(t, d) for t in periods for d in days if (t, d) not in present]
    if missing:
        shown = ", ".join(f"({t},{d})" for t, d in missing[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        raise DatasetError(f"{path.name}: missing cells {shown}{more}")
    wide = rows.pivot(index="t", columns="d", values="value")
    return wide.loc[list(periods), list(days)].astype(float)


def _read_period_series(path, periods):
    rows = _read_rows(path, ("t",))
    series = rows.set_index("t")["value"].astype(float)
    missing = [t for t in periods if t not in series.index]
    if missing:
        raise DatasetError(f"{path.name}: missing periods {missing}")
    return series.loc[list(periods)]


def _require(condition, message):
    if not condition:
        raise DatasetError(message)


def load_dataset(source="paper", *, periods=PERIODS, days=DAYS, verify=True):
    """
    Load a MarketDataset from a bundled fixture id or a directory of table CSVs.

    Checksums are verified whenever the directory carries a SHA256SUMS manifest.
    """
    directory = Path(source)
    if not directory.is_dir():
        directory = FIXTURE_ROOT / str(source)
        if not directory.is_dir():
            raise DatasetError(f"unknown fixture or directory {source!r}")
    if verify and (directory / CHECKSUM_FILE).exists():
        verify_checksums(directory)

    def path_of(stem):
        return directory / f"table_{stem}.csv"

    tables = {}
    for attr, stem in REQUIRED_TABLES.items():
        path = path_of(stem)
        if not path.exists():
            raise DatasetError(f"required table {path.name} not found in {directory}")
        tables[attr] = _read_table(path, periods, days)
    for attr, stem in OPTIONAL_TABLES.items():
        path = path_of(stem)
        tables[attr] = _read_table(path, periods, days) if path.exists() else None

    v2_path = path_of(SAMEDAY_VARIANCE_TABLE)
    v2 = _read_period_series(v2_path, periods) if v2_path.exists() else None

    forecasts = {}
    for key, stem in FORECAST_TABLES.items():
        path = path_of(stem)
        if path.exists():
            forecasts[key] = _read_table(path, periods, days)

    for attr in ("f", "g", "h"):
        _require((tables[attr].values >= 0).all(), f"table {REQUIRED_TABLES[attr]}: demands must be >= 0")
    for attr in ("a", "b", "c"):
        _require((tables[attr].values > 0).all(), f"table {REQUIRED_TABLES[attr]}: prices must be > 0")
    if tables["v1"] is not None:
        _require((tables["v1"].values > 0).all(), "table prevday_variance: variances must be > 0")
    if v2 is not None:
        _require((v2.values > 0).all(), "table sameday_variance: variances must be > 0")

    ds = MarketDataset(
        periods=tuple(periods),
        days=tuple(days),
        v2=v2,
        forecasts=forecasts or None,
        source=str(directory),
        **tables,
    )
    logger.info(f"loaded dataset {directory.name}: {len(ds.periods)} periods x {len(ds.days)} days")
    return ds


# ==========================================
# 2. PREDICTIONS AND VARIANCES
# ==========================================

@dataclass(frozen=True)
class PriceForecast:
    a: pd.DataFrame
    b: pd.DataFrame
    c: pd.DataFrame

    def triple(self, t, d):
        return PriceTriple(float(self.a.at[t, d]), float(self.b.at[t, d]), float(self.c.at[t, d]))


def _forecast_table(table):
    early = [t for t in table.index if t < CROSS_DAY_FROM]
    late = [t for t in table.index if t >= CROSS_DAY_FROM]
    out = pd.DataFrame(index=table.index, columns=table.columns, dtype=float)
    if early:
        # x(t,d) = mean over the early periods of day d
        out.loc[early, :] = np.tile(table.loc[early].mean(axis=0).values, (len(early), 1))
    if late:
        # x(t,d) = mean over all days of period t
        out.loc[late, :] = np.tile(table.loc[late].mean(axis=1).values[:, None], (1, table.shape[1]))
    return out


def predict_prices(ds):
    """Forecast (a, b, c) for every cell from realized prices."""
    return PriceForecast(_forecast_table(ds.a), _forecast_table(ds.b), _forecast_table(ds.c))


def printed_forecasts(ds):
    if not ds.forecasts or set(ds.forecasts) != {"a", "b", "c"}:
        raise UnsupportedPathError("dataset carries no printed price forecasts")
    return PriceForecast(ds.forecasts["a"], ds.forecasts["b"], ds.forecasts["c"])


def estimate_sameday_variance(ds):
    """
    V2(t) = (1/|days|) sum_d (f(t,d) - h(t,d))^2
    """
    return ((ds.f - ds.h) ** 2).mean(axis=1)


def prevday_variance(ds):
    """Previous-day error variances, passed through from the dataset."""
    if ds.v1 is None:
        raise UnsupportedPathError("previous-day variances are ingested, not estimated; table prevday_variance is absent")
    return ds.v1


def price_ordering_report(ds, forecast=None):
    """How often the ordering a < b < c fails, on realized and on forecast prices."""
    forecast = predict_prices(ds) if forecast is None else forecast

    def count(a, b, c):
        a, b, c = a.values, b.values, c.values
        return {
            "cells": int(a.size),
            "ordered": int(np.sum((a < b) & (b < c))),
            "b_le_a": int(np.sum(b <= a)),
            "c_le_b": int(np.sum(c <= b)),
        }

    return {
        "actual": count(ds.a, ds.b, ds.c),
        "predicted": count(forecast.a, forecast.b, forecast.c),
    }


# ==========================================
# 3. HEDGES
# ==========================================

@dataclass(frozen=True)
class HedgeTable:
    A: pd.DataFrame
    B: pd.DataFrame
    source: str = "recompute"

    def at(self, t, d):
        return float(self.A.at[t, d]), float(self.B.at[t, d])


def ingested_hedges(ds):
    if ds.a_opt is None or ds.b_opt is None:
        raise UnsupportedPathError("dataset carries no hedge tables")
    return HedgeTable(ds.a_opt, ds.b_opt, source="paper")


def compute_hedges(ds, grid=None, meshes=config.HEDGE_ZOOM_MESHES, threads=1,
                   window_sigmas=config.HEDGE_WINDOW_SIGMAS):
    """
    Per-cell optimal (A, B) from forecast prices and error variances.

    grid=None centres a window on (0, 0) with half-width
    window_sigmas * max(sigma1, sigma2) for each cell.
    """
    forecast = predict_prices(ds)
    v1 = prevday_variance(ds)
    v2 = estimate_sameday_variance(ds)
    cells = ds.cells()

    def solve(cell):
        t, d = cell
        pg = ErrorModel.from_variance(float(v1.at[t, d]))
        ph = ErrorModel.from_variance(float(v2.at[t]))
        if grid is None:
            half = window_sigmas * max(pg.sigma, ph.sigma)
            search = GridSpec.centered(half, meshes[0] if meshes else config.STANDARD_GRID["mesh"])
        else:
            search = grid
        p = forecast.triple(t, d)
        return optimal_parameters(p.a, p.b, p.c, pg, ph, search, meshes=meshes)

    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        solved = list(pool.map(solve, cells))

    A = pd.DataFrame(index=list(ds.periods), columns=list(ds.days), dtype=float)
    B = pd.DataFrame(index=list(ds.periods), columns=list(ds.days), dtype=float)
    for (t, d), (a_opt, b_opt) in zip(cells, solved):
        A.at[t, d] = a_opt
        B.at[t, d] = b_opt
    logger.info(f"computed hedges for {len(cells)} cells")
    return HedgeTable(A, B, source="recompute")


# ==========================================
# 4. LEDGERS
# ==========================================

@dataclass(frozen=True)
class BacktestLedger:
    strategy: str
    records: dict  # (t, d) -> (A, B, CostBreakdown), ascending d then t

    @property
    def total(self):
        total = 0.0
        for _, _, breakdown in self.records.values():
            total += breakdown.total
        return total

    @property
    def index(self):
        return tuple(self.records)

    def to_frame(self):
        rows = []
        for (t, d), (A, B, breakdown) in self.records.items():
            rows.append({"t": t, "d": d, "A": A, "B": B, **breakdown.as_dict()})
        return pd.DataFrame(rows)

    def summary(self):
        return {"strategy": self.strategy, "total": self.total, "total_yen": round_yen(self.total)}


def run_backtest(ds, strategy, hedges=None):
    """
    Replay procurement at realized prices.

    optimized: hedges (HedgeTable) per cell
    naive:     A = B = 0
    perfect:   buy exactly f day-ahead
    """
    if strategy not in STRATEGIES:
        raise InvalidArgumentError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if strategy == "optimized" and hedges is None:
        raise InvalidArgumentError("the optimized strategy needs a hedge table")

    records = {}
    for t, d in ds.cells():
        f = float(ds.f.at[t, d])
        prices = ds.prices_at(t, d)
        if strategy == "perfect":
            A, B = 0.0, 0.0
            params = ProcurementParams(f, f, 0.0, 0.0)
        else:
            A, B = hedges.at(t, d) if strategy == "optimized" else (0.0, 0.0)
            params = ds.params_at(t, d, A, B)
        records[(t, d)] = (A, B, total_cost(f, params, prices))

    ledger = BacktestLedger(strategy, records)
    logger.info(f"{strategy} total: {ledger.total:.4f} yen")
    return ledger


@dataclass(frozen=True)
class StrategyComparison:
    baseline: str
    totals: dict
    deltas: dict
    percent: dict

    def as_dict(self):
        return {
            "baseline": self.baseline,
            "totals": {k: {"total": v, "total_yen": round_yen(v)} for k, v in self.totals.items()},
            "deltas": {k: {"delta": v, "delta_yen": round_yen(v), "percent": self.percent[k]}
                       for k, v in self.deltas.items()},
        }


def compare_strategies(ledgers, baseline):
    """Differences (candidate - baseline) in yen and in percent of the baseline."""
    ledgers = list(ledgers)
    if len(ledgers) < 2:
        raise InvalidArgumentError("compare_strategies needs at least two ledgers")
    names = [ledger.strategy for ledger in ledgers]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise InvalidArgumentError(f"ledger names must be unique, repeated: {duplicates}")
    by_name = {ledger.strategy: ledger for ledger in ledgers}
    if baseline not in by_name:
        raise InvalidArgumentError(f"baseline {baseline!r} not among {sorted(by_name)}")
    reference = by_name[baseline]
    for ledger in by_name.values():
        if set(ledger.index) != set(reference.index):
            raise DatasetError(f"ledger {ledger.strategy!r} covers different cells than {baseline!r}")

    base_total = reference.total
    totals = {name: ledger.total for name, ledger in by_name.items()}
    deltas = {name: total - base_total for name, total in totals.items()}
    percent = {name: (100.0 * delta / base_total if base_total else math.nan) for name, delta in deltas.items()}
    return StrategyComparison(baseline=baseline, totals=totals, deltas=deltas, percent=percent)
