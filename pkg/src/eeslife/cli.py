"""Command-line entry point: ``eeslife <command> [config.ini] [options]``.

Exit codes: 0 ok, 1 internal error (or failed validation), 2 config error,
3 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    SOH_PROFILE_NOTE,
    profitability_vs_soh,
    render_csv,
    render_svg,
    sweep_degradation,
    sweep_om,
)
from .battery import BatteryState, DegradationParams
from .config import describe_keys, load_config
from .dispatch import DayProblem, brute_force_day, solve_day
from .errors import ConfigError, PriceLoadError
from .lifecycle import LifeTrace, optimize_mbu, retire, simulate_life
from .market import price_stats, synth_prices, write_prices

log = logging.getLogger("eeslife")

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_DATA = 0, 1, 2, 3
VALIDATION_TOL = 0.005

DAILY_COLUMNS = ("date", "day", "gross_usd", "throughput_kwh", "cycle_kwh", "calendar_kwh",
                 "degradation_kwh", "wear_u", "soh", "penalty_usd_per_kwh")
ANNUAL_COLUMNS = ("year", "days", "gross_usd", "om_usd", "net_usd", "discount", "discounted_net_usd")


def _out_dir(args, cfg) -> Path:
    out = Path(args.out) if getattr(args, "out", None) else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_trace(trace: LifeTrace, out: Path, prefix: str = "") -> None:
    with (out / f"{prefix}daily.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DAILY_COLUMNS)
        for i, d in enumerate(trace.dates()):
            w.writerow([d.isoformat(), i + 1] + [repr(float(trace.__dict__[k][i])) for k in (
                "gross", "throughput", "cycle", "calendar", "degradation", "wear_u", "soh", "penalty")])
    with (out / f"{prefix}annual.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ANNUAL_COLUMNS)
        for r in trace.annual:
            w.writerow([r.year, r.days, repr(r.gross), repr(r.om), repr(r.net), repr(r.discount),
                        repr(r.discounted_net)])


def summarize(full: LifeTrace, retired: LifeTrace) -> dict:
    return {
        "mu_star_usd_per_kwh": full.mu,
        "lb_usd": full.lb,
        "lb_usd_per_kw": full.lb / full.rated_power,
        "lb_usd_per_kwh": full.lb / full.rated_energy,
        "abu_usd_per_kwh": full.abu,
        "physical_eol_year": full.physical_eol_year,
        "economic_eol_year": full.economic_eol_year,
        "cash_flow_non_monotone": full.non_monotone,
        "retired_year": retired.retired_year,
        "lb_after_retirement_usd": retired.lb,
        "abu_after_retirement_usd_per_kwh": retired.abu,
        "days_simulated": full.n_days,
    }


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    life = cfg.lifecycle()
    trace = simulate_life(life, args.mu)
    out = _out_dir(args, cfg)
    write_trace(trace, out)
    log.info("mu=%g lb=%.4f physical EOL year=%s economic EOL year=%s", args.mu, trace.lb,
             trace.physical_eol_year, trace.economic_eol_year)
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = load_config(args.config)
    life = cfg.lifecycle()
    mu_star, full = optimize_mbu(life, jobs=args.jobs)
    retired = retire(life, mu_star, full)
    out = _out_dir(args, cfg)
    write_trace(full, out)
    summary = summarize(full, retired)
    _dump_json(summary, out / "summary.json")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_sweep_om(args) -> int:
    cfg = load_config(args.config)
    values = args.om if args.om else list(cfg.get("sweep", "om_values"))
    res = sweep_om(cfg.lifecycle(), values, jobs=args.jobs)
    out = _out_dir(args, cfg)
    render_csv(res, out / "om_sweep.csv")
    render_svg(res, out / "om_sweep.svg")
    return EXIT_OK


def cmd_sweep_degradation(args) -> int:
    cfg = load_config(args.config)
    caps = args.n100 if args.n100 else list(cfg.get("sweep", "cycle_caps"))
    rates = args.cal_rates if args.cal_rates else list(cfg.get("sweep", "cal_rates"))
    res = sweep_degradation(cfg.lifecycle(), caps, rates, jobs=args.jobs)
    out = _out_dir(args, cfg)
    render_csv(res, out / "deg_sweep.csv")
    render_svg(res, out / "deg_sweep_lb.svg", column="lb_usd_per_kw")
    render_svg(res, out / "deg_sweep_abu.svg", column="abu_usd_per_kwh")
    return EXIT_OK


def cmd_soh_profile(args) -> int:
    cfg = load_config(args.config)
    res = profitability_vs_soh(cfg.lifecycle())
    out = _out_dir(args, cfg)
    render_csv(res, out / "soh_profile.csv")
    render_svg(res, out / "soh_profile.svg")
    _dump_json({"method": SOH_PROFILE_NOTE}, out / "soh_profile.meta.json")
    return EXIT_OK


def cmd_synth_prices(args) -> int:
    series = synth_prices(args.seed, args.days, args.spread, args.base, args.noise, day_sd=args.day_sd)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_prices(series, out)
    stats = price_stats(series)
    print(f"wrote {out}: {stats.n_days} days, mean daily spread {stats.mean_daily_spread:.3f} $/MWh")
    return EXIT_OK


def random_day_problem(rng: np.random.Generator, params: DegradationParams | None = None) -> DayProblem:
    """A realistic random arbitrage day: synthetic prices, random wear and penalty."""
    params = params or DegradationParams()
    series = synth_prices(
        int(rng.integers(2**31)), 1,
        spread_mean=float(rng.uniform(10, 60)),
        base=float(rng.uniform(15, 45)),
        noise_sd=float(rng.uniform(0, 6)),
    )
    state = BatteryState.at_wear(params, float(rng.uniform(0, 1)))
    return DayProblem(series.day(0), state, penalty=float(rng.uniform(0, 0.006)), params=params)


def validate_dispatch(n: int, seed: int, soc_levels: int = 401) -> list[tuple[int, float, float, float]]:
    """(instance, solver objective, oracle objective, relative gap) rows."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        prob = random_day_problem(rng)
        exact = solve_day(prob).objective
        grid = brute_force_day(prob, soc_levels=soc_levels).objective
        gap = (exact - grid) / max(abs(exact), 1e-9)
        rows.append((i, exact, grid, gap))
    return rows


def cmd_validate_dispatch(args) -> int:
    rows = validate_dispatch(args.n, args.seed, args.soc_levels)
    worst = max(r[3] for r in rows)
    below = [r for r in rows if r[1] < r[2] - 1e-12]
    print(f"{len(rows)} instances, max relative gap {worst:.6f}, solver below oracle on {len(below)}")
    ok = worst <= VALIDATION_TOL and not below
    return EXIT_OK if ok else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    epilog = describe_keys()
    fmt = argparse.RawDescriptionHelpFormatter
    p = argparse.ArgumentParser(prog="eeslife", description="Storage lifecycle economics simulator.",
                                epilog=epilog, formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, config=True, jobs=False):
        sp = sub.add_parser(name, help=help_text, description=help_text, epilog=epilog, formatter_class=fmt)
        if config:
            sp.add_argument("config", nargs="?", help="INI config file (defaults to the baseline)")
            sp.add_argument("--out", help="output directory (overrides [output] dir)")
        if jobs:
            sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        sp.set_defaults(func=func)
        return sp

    sp = add("simulate", cmd_simulate, "Simulate one life at a fixed MBU; writes daily/annual CSVs.")
    sp.add_argument("--mu", type=float, default=0.0, help="MBU, $ per kWh of degradation")
    add("optimize", cmd_optimize, "Find the optimal MBU; writes traces and summary.json.", jobs=True)
    sp = add("sweep-om", cmd_sweep_om, "EOL vs fixed O&M; writes om_sweep.csv/.svg.", jobs=True)
    sp.add_argument("--om", type=float, nargs="+", help="O&M values, $/kW-yr")
    sp = add("sweep-degradation", cmd_sweep_degradation,
             "Benefit vs cycling and calendar rates; writes deg_sweep.csv and SVGs.", jobs=True)
    sp.add_argument("--n100", type=float, nargs="+", help="cycle-capability grid")
    sp.add_argument("--cal-rates", type=float, nargs="+", help="calendar-rate grid, 1/yr")
    add("soh-profile", cmd_soh_profile, "Revenue and functionality vs SOH; writes soh_profile.csv/.svg.")
    sp = add("synth-prices", cmd_synth_prices, "Write a synthetic hourly price CSV.", config=False)
    sp.add_argument("--days", type=int, default=365)
    sp.add_argument("--spread", type=float, default=32.0, help="mean daily spread, $/MWh")
    sp.add_argument("--base", type=float, default=30.0, help="mean price, $/MWh")
    sp.add_argument("--noise", type=float, default=3.0, help="hourly noise sd, $/MWh")
    sp.add_argument("--day-sd", type=float, default=0.5, help="log-sd of day-to-day amplitude")
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--out", default="prices.csv", help="output CSV path")
    sp = add("validate-dispatch", cmd_validate_dispatch,
             "Compare the exact day solver with the grid oracle on random days.", config=False)
    sp.add_argument("--n", type=int, default=100, help="number of random instances")
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--soc-levels", type=int, default=401)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PriceLoadError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
