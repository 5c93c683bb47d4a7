"""
Command-line entry point.

    python -m lab.procurement expect --A 0.6 --B -2
    python -m lab.procurement backtest --fixture paper --strategy all

Exit codes: 0 success, 2 usage error, 1 data / validation error.
Results go to stdout (or --out); diagnostics go to stderr through loguru.
"""

import argparse
import math
import sys

import pandas as pd
from loguru import logger

from lab.procurement import config, log
from lab.procurement.backtest import (
    STRATEGIES,
    compare_strategies,
    compute_hedges,
    ingested_hedges,
    load_dataset,
    price_ordering_report,
    run_backtest,
)
from lab.procurement.distributions import ErrorModel
from lab.procurement.errors import ProcurementError
from lab.procurement.expectation import ExpectationInputs, expected_components, histogram, monte_carlo
from lab.procurement.optimizer import GridSpec, expected_cost_surface, optimal_parameters
from lab.procurement.reporting import round_yen, write_csv, write_json
from lab.procurement.scenario_lab import (
    ScenarioConfig,
    builtin_scenarios,
    direction_table,
    load_scenarios,
    run_scenarios,
    variance_surface,
)


# ==========================================
# PARSER
# ==========================================

def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED, help="global random seed (default 0)")
    common.add_argument("--mc-n", type=int, default=config.DEFAULT_MC_N, help="Monte Carlo draws (default 1000000)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    common.add_argument("--out", default=None, help="write results to this path instead of stdout")
    common.add_argument("--threads", type=int, default=config.MAX_WORKERS,
                        help="worker threads; results do not depend on it")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    return common


def _add_market(parser, with_hedge=True):
    parser.add_argument("--f", type=float, default=100.0, help="realized demand")
    parser.add_argument("--sigma1", type=float, default=math.sqrt(3.0), help="std dev of previous-day error G")
    parser.add_argument("--sigma2", type=float, default=math.sqrt(2.0), help="std dev of same-day error H")
    parser.add_argument("--a", type=float, default=1.0, help="day-ahead unit price")
    parser.add_argument("--b", type=float, default=2.0, help="intra-day unit price")
    parser.add_argument("--c", type=float, default=3.0, help="penalty unit price")
    if with_hedge:
        parser.add_argument("--A", type=float, default=0.0, help="day-ahead hedge offset")
        parser.add_argument("--B", type=float, default=0.0, help="intra-day hedge offset")


def _add_grid(parser):
    standard = config.STANDARD_GRID
    parser.add_argument("--a-min", type=float, default=standard["a_min"])
    parser.add_argument("--a-max", type=float, default=standard["a_max"])
    parser.add_argument("--b-min", type=float, default=standard["b_min"])
    parser.add_argument("--b-max", type=float, default=standard["b_max"])
    parser.add_argument("--mesh", type=float, default=standard["mesh"])


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="procurement",
        description="Expected-cost hedging for day-ahead / intra-day electricity procurement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expect", parents=[common], help="E[C] by quadrature for one (A, B)")
    _add_market(p)
    p.add_argument("--inner", choices=("closed", "quad"), default="closed", help="inner integral of E[C3]")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo mean and variance for one (A, B)")
    _add_market(p)
    p.add_argument("--bin-width", type=float, default=None, help="also emit a histogram with this bin width")

    p = sub.add_parser("optimize", parents=[common], help="E-optimal (A, B) with the price-ordering rules")
    _add_market(p, with_hedge=False)
    _add_grid(p)

    p = sub.add_parser("surface", parents=[common], help="E[C] or V[C] on a grid")
    _add_market(p, with_hedge=False)
    _add_grid(p)
    p.add_argument("--kind", choices=("expectation", "variance"), default="expectation")

    p = sub.add_parser("scenarios", parents=[common], help="base conditions and their variations")
    p.add_argument("--config", default=None, help="JSON file of scenario configs (default: built-in set)")
    p.add_argument("--only", nargs="+", default=None, metavar="NAME", help="run only these scenarios")
    p.add_argument("--no-variance", action="store_true", help="skip the Monte Carlo surfaces")

    p = sub.add_parser("backtest", parents=[common], help="replay the market dataset")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--fixture", default=None, help="bundled fixture id (default: paper)")
    source.add_argument("--data", default=None, help="directory of table_<name>.csv files")
    p.add_argument("--strategy", choices=STRATEGIES + ("all",), default="all")
    p.add_argument("--hedges", choices=("paper", "recompute"), default="paper")
    return parser


# ==========================================
# COMMANDS
# ==========================================

def _inputs(args, A=None, B=None):
    return ExpectationInputs(
        Ea=args.a, Eb=args.b, Ec=args.c, Eg=args.f,
        A=args.A if A is None else A, B=args.B if B is None else B,
        pg=ErrorModel.normal(args.sigma1), ph=ErrorModel.normal(args.sigma2),
    )


def _grid(args):
    return GridSpec(args.a_min, args.a_max, args.b_min, args.b_max, args.mesh)


def _emit(args, document, frame):
    if args.format == "csv":
        write_csv(frame, args.out)
    else:
        write_json(document, args.out)


def cmd_expect(args):
    inputs = _inputs(args)
    c1, c2, c3 = expected_components(inputs, inner=args.inner)
    total = c1 + c2 + c3
    document = {
        "command": "expect",
        "inputs": {"f": args.f, "sigma1": args.sigma1, "sigma2": args.sigma2,
                   "a": args.a, "b": args.b, "c": args.c, "A": args.A, "B": args.B},
        "expected_total": total,
        "components": {"c1": c1, "c2": c2, "c3": c3},
    }
    _emit(args, document, pd.DataFrame([{"A": args.A, "B": args.B, "c1": c1, "c2": c2, "c3": c3, "total": total}]))


def cmd_simulate(args):
    inputs = _inputs(args)
    estimate = monte_carlo(inputs, args.mc_n, args.seed, threads=args.threads)
    document = {"command": "simulate", "A": args.A, "B": args.B, **estimate.as_dict()}
    bins = None
    if args.bin_width is not None:
        bins = histogram(inputs, args.bin_width, n=args.mc_n, seed=args.seed, threads=args.threads)
        document["histogram"] = [{"low": low, "count": count} for low, count in bins]
    if args.format == "csv" and bins is not None:
        write_csv(pd.DataFrame(bins, columns=["low", "count"]), args.out)
    else:
        _emit(args, document, pd.DataFrame([estimate.as_dict()]))


def cmd_optimize(args):
    pg, ph = ErrorModel.normal(args.sigma1), ErrorModel.normal(args.sigma2)
    A, B = optimal_parameters(args.a, args.b, args.c, pg, ph, _grid(args))
    c1, c2, c3 = expected_components(_inputs(args, A, B))
    document = {"command": "optimize", "A": A, "B": B, "expected_total": c1 + c2 + c3,
                "grid": _grid(args).as_dict()}
    _emit(args, document, pd.DataFrame([{"A": A, "B": B, "expected_total": c1 + c2 + c3}]))


def cmd_surface(args):
    grid = _grid(args)
    if args.kind == "expectation":
        pg, ph = ErrorModel.normal(args.sigma1), ErrorModel.normal(args.sigma2)
        report = expected_cost_surface(args.a, args.b, args.c, pg, ph, grid, Eg=args.f)
    else:
        cfg = ScenarioConfig("cli", f=args.f, sigma1=args.sigma1, sigma2=args.sigma2,
                             a=args.a, b=args.b, c=args.c, grid=grid, mc_n=args.mc_n, seed=args.seed)
        report = variance_surface(cfg, threads=args.threads)
    _emit(args, report.to_dict(), report.to_frame())


def cmd_scenarios(args):
    configs = load_scenarios(args.config) if args.config else builtin_scenarios(args.mc_n, args.seed)
    if args.only:
        missing = set(args.only) - {c.name for c in configs}
        if missing:
            raise ProcurementError(f"unknown scenario(s): {sorted(missing)}")
        configs = [c for c in configs if c.name in args.only]
    results = run_scenarios(configs, with_variance=not args.no_variance, threads=args.threads)
    document = {"command": "scenarios", "results": [r.summary() for r in results]}
    if any(r.config.name == "base" for r in results):
        document["directions"] = direction_table(results)
    rows = []
    for r in results:
        s = r.summary()
        rows.append({"name": s["name"], "e_A": s["e_argmin"]["A"], "e_B": s["e_argmin"]["B"], "e_min": s["e_min"],
                     "v_A": s.get("v_argmin", {}).get("A"), "v_B": s.get("v_argmin", {}).get("B"),
                     "v_min": s.get("v_min")})
    _emit(args, document, pd.DataFrame(rows))


def cmd_backtest(args):
    ds = load_dataset(args.data or args.fixture or "paper")
    strategies = STRATEGIES if args.strategy == "all" else (args.strategy,)
    hedges = None
    if "optimized" in strategies:
        hedges = ingested_hedges(ds) if args.hedges == "paper" else compute_hedges(ds, threads=args.threads)

    ledgers = [run_backtest(ds, s, hedges) for s in strategies]
    document = {
        "command": "backtest",
        "dataset": ds.source,
        "hedges": hedges.source if hedges is not None else None,
        "strategies": [{**ledger.summary(), "periods": ledger.to_frame()} for ledger in ledgers],
        "price_ordering": price_ordering_report(ds),
    }
    if len(ledgers) == 1:
        document["total"] = ledgers[0].total
        document["total_yen"] = round_yen(ledgers[0].total)
    else:
        baseline = "naive" if "naive" in strategies else strategies[0]
        document["comparison"] = compare_strategies(ledgers, baseline).as_dict()
        if "optimized" in strategies and "perfect" in strategies:
            document["versus_perfect"] = compare_strategies(ledgers, "perfect").as_dict()

    frame = pd.concat([ledger.to_frame().assign(strategy=ledger.strategy) for ledger in ledgers], ignore_index=True)
    _emit(args, document, frame)


COMMANDS = {
    "expect": cmd_expect,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "surface": cmd_surface,
    "scenarios": cmd_scenarios,
    "backtest": cmd_backtest,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    log.configure(args.verbose)
    try:
        COMMANDS[args.command](args)
    except ProcurementError as exc:
        logger.error(str(exc))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
