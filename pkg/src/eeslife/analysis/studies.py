"""Parameter studies built on the lifecycle optimizer."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..battery import BatteryState, efficiency, power_capacity
from ..dispatch import DayProblem, solve_day
from ..lifecycle import LifecycleConfig, retire_and_rerun, with_params

SOH_LEVELS = tuple(round(1.0 - 0.05 * i, 2) for i in range(7))

# metadata attached to the SOH profile output
SOH_PROFILE_NOTE = (
    "gross revenue per SOH level: one price-year of unpenalized (mu=0) "
    "dispatch with wear frozen at that level"
)


@dataclass
class SweepResult:
    """Grid axes plus one record per grid point, in grid order."""

    kind: str
    axes: dict[str, list[float]]
    cells: list[dict] = field(default_factory=list)
    columns: tuple[str, ...] = ()

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.axes.values())


OM_COLUMNS = ("om_usd_per_kw_yr", "econ_eol_yr", "phys_eol_yr", "lb_usd_per_kw")
SOH_COLUMNS = ("soh", "gross_usd_per_kw_yr", "pmax_frac", "emax_frac", "eta")
DEG_COLUMNS = ("n100", "cal_rate_per_yr", "lb_usd_per_kw", "abu_usd_per_kwh")


def _cell(config: LifecycleConfig) -> dict:
    trace = retire_and_rerun(config)
    return {
        "econ_eol_yr": trace.economic_eol_year,
        "phys_eol_yr": trace.physical_eol_year,
        "lb_usd_per_kw": trace.lb / config.params.rated_power,
        "lb_usd_per_kwh": trace.lb / config.params.rated_energy,
        "abu_usd_per_kwh": trace.abu,
        "mu": trace.mu,
    }


def _run_cells(configs: list[LifecycleConfig], jobs: int) -> list[dict]:
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_cell, configs))
    return [_cell(c) for c in configs]


def economic_life(cell: dict) -> int | None:
    """Economic EOL if one exists, otherwise the physical EOL."""
    return cell["econ_eol_yr"] if cell["econ_eol_yr"] is not None else cell["phys_eol_yr"]


def sweep_om(config: LifecycleConfig, om_values: list[float], jobs: int = 1) -> SweepResult:
    """Economic and physical EOL across fixed O&M costs."""
    if any(v < 0 for v in om_values):
        raise ValueError("O&M values must be >= 0")
    configs = [replace(config, om_fixed=float(v)) for v in om_values]
    cells = _run_cells(configs, jobs)
    for v, c in zip(om_values, cells):
        c["om_usd_per_kw_yr"] = float(v)
    return SweepResult("om", {"om_usd_per_kw_yr": [float(v) for v in om_values]}, cells, OM_COLUMNS)


def om_crossover(result: SweepResult) -> float | None:
    """Smallest O&M at which the economic EOL precedes the physical EOL."""
    for c in result.cells:
        e, p = c["econ_eol_yr"], c["phys_eol_yr"]
        if e is not None and (p is None or e < p):
            return c["om_usd_per_kw_yr"]
    return None


def annual_gross_at(config: LifecycleConfig, state: BatteryState) -> float:
    """One price-year of mu=0 dispatch with wear frozen at ``state``, $."""
    soc = 0.0
    total = 0.0
    for day in range(config.prices.n_days):
        res = solve_day(
            DayProblem(config.prices.day(day), state, rho=config.rho, e_start=min(soc, state.e_max),
                       params=config.params)
        )
        soc = float(res.soc[-1])
        total += res.gross_revenue
    return total


def profitability_vs_soh(config: LifecycleConfig, levels: tuple[float, ...] = SOH_LEVELS) -> SweepResult:
    p = config.params
    cells = []
    for soh in levels:
        state = BatteryState.at_soh(p, soh)
        cells.append({
            "soh": soh,
            "gross_usd_per_kw_yr": annual_gross_at(config, state) / p.rated_power,
            "pmax_frac": power_capacity(p.rated_power, state.z_ratio) / p.rated_power,
            "emax_frac": state.e_max / p.rated_energy,
            "eta": efficiency(p.eta0, state.z_ratio),
        })
    return SweepResult("soh", {"soh": list(levels)}, cells, SOH_COLUMNS)


def sweep_degradation(
    config: LifecycleConfig,
    cycle_caps: list[float],
    cal_rates: list[float],
    jobs: int = 1,
) -> SweepResult:
    """Life-cycle benefit and ABU over cycling capability x calendar rate."""
    if not cycle_caps or not cal_rates:
        raise ValueError("both grids must be non-empty")
    points = list(itertools.product(cycle_caps, cal_rates))
    configs = [with_params(config, n100=float(n), calendar_rate=float(r)) for n, r in points]
    cells = _run_cells(configs, jobs)
    for (n, r), c in zip(points, cells):
        c["n100"] = float(n)
        c["cal_rate_per_yr"] = float(r)
    return SweepResult(
        "degradation",
        {"n100": [float(n) for n in cycle_caps], "cal_rate_per_yr": [float(r) for r in cal_rates]},
        cells,
        DEG_COLUMNS,
    )


def grid_values(result: SweepResult, column: str) -> np.ndarray:
    """Reshape a 2-axis sweep column into (len(axis0), len(axis1))."""
    return np.array([c[column] for c in result.cells], dtype=float).reshape(result.shape)
