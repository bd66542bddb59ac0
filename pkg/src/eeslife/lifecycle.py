"""Whole-life simulation for a given marginal benefit of usage (MBU).

The MBU ``mu`` is the price, in $ per kWh of degradation, that the
operator charges itself for wear. Each day's dispatch sees it inflated by
the discount factor of the current mid-term period, so wear gets costlier as
the system ages. ``optimize_mbu`` picks the ``mu`` that maximizes the
discounted life-cycle benefit; cash flow and end-of-life markers are read off
the resulting trace.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import date, timedelta

import numpy as np

from .battery import BatteryState, DegradationParams, apply_wear, calendar_per_day, throughput_budget
from .dispatch import DayProblem, solve_day
from .errors import ConfigError, DomainError
from .market import PriceSeries, max_spread_margin

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
MIDTERM_PERIODS = ("day", "month", "year")
DISCOUNTING = ("step", "continuous")


@dataclass(frozen=True)
class MbuGrid:
    """Search space for the MBU, $/kWh of degradation.

    ``hi=None`` means twice the largest daily spread margin of the price
    year. ``values`` overrides the generated grid entirely.
    """

    lo: float = 0.0
    hi: float | None = None
    points: int = 32
    refine: bool = True
    rel_tol: float = 1e-3
    values: tuple[float, ...] | None = None

    def grid(self, prices: PriceSeries, eta0: float) -> np.ndarray:
        if self.values is not None:
            vals = np.array(sorted(set(float(v) for v in self.values)))
            if vals.size == 0:
                raise ConfigError("MBU grid is empty")
            if vals[0] < 0:
                raise ConfigError("MBU grid values must be >= 0")
            return vals
        hi = self.hi if self.hi is not None else 2.0 * max_spread_margin(prices, eta0)
        if self.points < 1:
            raise ConfigError("MBU grid is empty")
        if self.points == 1 or hi <= self.lo:
            if hi < self.lo:
                raise ConfigError(f"MBU bounds need lo <= hi, got [{self.lo}, {hi}]")
            return np.array([self.lo])
        if self.lo == 0.0:
            return np.concatenate([[0.0], np.geomspace(hi * 1e-3, hi, self.points - 1)])
        return np.geomspace(self.lo, hi, self.points)


@dataclass(frozen=True)
class LifecycleConfig:
    params: DegradationParams
    prices: PriceSeries
    discount_rate: float = 0.07
    om_fixed: float = 9.0
    max_horizon_years: int = 30
    mbu_grid: MbuGrid = field(default_factory=MbuGrid)
    midterm_update: str = "month"
    discounting: str = "step"
    rho: float = 0.0
    e_end_min: float = 0.0

    def __post_init__(self) -> None:
        if self.discount_rate < 0:
            raise ConfigError(f"discount_rate must be >= 0, got {self.discount_rate}")
        if self.om_fixed < 0:
            raise ConfigError(f"om_fixed must be >= 0, got {self.om_fixed}")
        if self.max_horizon_years < 1:
            raise ConfigError("max_horizon_years must be >= 1")
        if self.midterm_update not in MIDTERM_PERIODS:
            raise ConfigError(f"midterm_update must be one of {MIDTERM_PERIODS}")
        if self.discounting not in DISCOUNTING:
            raise ConfigError(f"discounting must be one of {DISCOUNTING}")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError(f"rho must lie in [0, 1), got {self.rho}")

    @property
    def days_per_year(self) -> int:
        return self.prices.n_days


@dataclass(frozen=True)
class AnnualRecord:
    year: int
    days: int
    gross: float
    om: float
    net: float
    discount: float
    discounted_net: float


@dataclass(eq=False)
class LifeTrace:
    """Daily and annual outcome of one simulated life."""

    mu: float
    start_date: date
    days_per_year: int
    budget: float
    rated_power: float
    rated_energy: float
    om_fixed: float
    discount_rate: float
    gross: np.ndarray
    throughput: np.ndarray
    cycle: np.ndarray
    calendar: np.ndarray
    degradation: np.ndarray
    wear_u: np.ndarray
    soh: np.ndarray
    penalty: np.ndarray
    physical_eol_year: int | None = None
    retired_year: int | None = None
    annual: list[AnnualRecord] = field(default_factory=list)
    economic_eol_year: int | None = None
    non_monotone: bool = False

    @property
    def n_days(self) -> int:
        return self.gross.size

    @property
    def terminal_wear(self) -> float:
        return float(self.wear_u[-1]) if self.n_days else 0.0

    @property
    def used(self) -> float:
        return float(self.degradation.sum())

    @property
    def lb(self) -> float:
        return float(sum(r.discounted_net for r in self.annual))

    @property
    def abu(self) -> float:
        used = self.budget if self.terminal_wear >= 1.0 else self.terminal_wear * self.budget
        return abu(self.lb, used)

    def dates(self) -> list[date]:
        return [self.start_date + timedelta(days=i) for i in range(self.n_days)]


def discount_factor(rate: float, years: float) -> float:
    return (1.0 + rate) ** (-years)


def _refresh_days(config: LifecycleConfig, n_days: int) -> np.ndarray:
    """Boolean mask of days that start a new mid-term period."""
    mask = np.zeros(n_days, dtype=bool)
    if n_days == 0:
        return mask
    mask[0] = True
    N = config.days_per_year
    if config.midterm_update == "day":
        mask[:] = True
    elif config.midterm_update == "year":
        mask[::N] = True
    else:
        start = config.prices.start_date
        for i in range(1, n_days):
            if (start + timedelta(days=i)).day == 1:
                mask[i] = True
        mask[::N] = True
    return mask


def simulate_life(config: LifecycleConfig, mu: float, retire_after_years: int | None = None) -> LifeTrace:
    """Operate the system day by day until physical EOL, the horizon or retirement.

    ``mu = inf`` never operates. Wear on the day the budget runs out is
    clipped to what is left, so the recorded degradation sums to exactly the
    budget at physical EOL.
    """
    if not mu >= 0:
        raise DomainError(f"mu must be >= 0, got {mu}")
    params = config.params
    N = config.days_per_year
    budget = throughput_budget(params)
    cal_day = calendar_per_day(params)
    c_fix_daily = config.om_fixed * params.rated_power / N
    years = config.max_horizon_years
    if retire_after_years is not None:
        years = min(years, max(1, retire_after_years))
    max_days = years * N
    refresh = _refresh_days(config, max_days)

    cols = {k: np.zeros(max_days) for k in (
        "gross", "throughput", "cycle", "calendar", "degradation", "wear_u", "soh", "penalty")}
    state = BatteryState.fresh(params)
    soc = 0.0
    used = 0.0
    delta = 1.0
    physical_eol_year = None
    n = 0
    for day in range(max_days):
        if refresh[day]:
            elapsed = day / N
            if config.discounting == "step":
                elapsed = math.floor(elapsed)
            delta = discount_factor(config.discount_rate, elapsed)
        penalty = mu / delta
        problem = DayProblem(
            config.prices.day(day % N),
            state,
            penalty=penalty,
            c_fix_daily=c_fix_daily,
            rho=config.rho,
            e_start=min(soc, state.e_max),
            e_end_min=min(config.e_end_min, state.e_max),
            params=params,
        )
        res = solve_day(problem)
        soc = float(res.soc[-1])
        d = res.degradation + cal_day
        applied = min(d, budget - used)
        used += applied
        state = apply_wear(state, applied, params)
        if used >= budget * (1.0 - 1e-12):
            state = BatteryState.at_wear(params, 1.0, state.age_days)
        cols["gross"][day] = res.gross_revenue
        cols["throughput"][day] = res.throughput
        cols["cycle"][day] = res.degradation
        cols["calendar"][day] = cal_day
        cols["degradation"][day] = applied
        cols["wear_u"][day] = state.wear_u
        cols["soh"][day] = state.soh
        cols["penalty"][day] = penalty
        n = day + 1
        if state.at_eol:
            physical_eol_year = day // N + 1
            break
    trace = LifeTrace(
        mu=mu,
        start_date=config.prices.start_date,
        days_per_year=N,
        budget=budget,
        rated_power=params.rated_power,
        rated_energy=params.rated_energy,
        om_fixed=config.om_fixed,
        discount_rate=config.discount_rate,
        physical_eol_year=physical_eol_year,
        retired_year=retire_after_years if retire_after_years is not None and n == years * N else None,
        **{k: v[:n].copy() for k, v in cols.items()},
    )
    trace.annual = cash_flow(trace)
    trace.economic_eol_year = economic_eol(trace.annual)
    trace.non_monotone = is_non_monotone(trace.annual)
    return trace


def cash_flow(trace: LifeTrace) -> list[AnnualRecord]:
    """Annual gross revenue, fixed O&M, net and discounted net.

    O&M is charged on rated power and prorated for a final partial year.
    """
    N = trace.days_per_year
    out = []
    n_years = -(-trace.n_days // N)
    for y in range(n_years):
        sl = slice(y * N, min((y + 1) * N, trace.n_days))
        days = sl.stop - sl.start
        gross = float(trace.gross[sl].sum())
        om = trace.om_fixed * trace.rated_power * days / N
        net = gross - om
        disc = discount_factor(trace.discount_rate, y)
        out.append(AnnualRecord(y + 1, days, gross, om, net, disc, net * disc))
    return out


def economic_eol(cash: list[AnnualRecord]) -> int | None:
    """Last year before the first non-positive net year.

    A loss in year 1 still counts as one economic year. ``None`` when every
    year is profitable, in which case physical EOL governs.
    """
    if not cash:
        raise DomainError("cash flow table is empty")
    for rec in cash:
        if rec.net <= 0.0:
            return max(1, rec.year - 1)
    return None


def is_non_monotone(cash: list[AnnualRecord]) -> bool:
    """True if a profitable year follows an unprofitable one."""
    seen_loss = False
    for rec in cash:
        if rec.net <= 0.0:
            seen_loss = True
        elif seen_loss:
            return True
    return False


def abu(lb: float, used: float) -> float:
    """Average benefit of usage, $ per kWh of degradation."""
    if not used > 0:
        raise DomainError(f"usage must be positive, got {used}")
    return lb / used


def npv(trace: LifeTrace, capital_cost: float) -> float:
    """Life-cycle benefit net of an upfront cost; reporting only."""
    return trace.lb - capital_cost


def _lb_at(args: tuple[LifecycleConfig, float]) -> float:
    config, mu = args
    return simulate_life(config, mu).lb


def _evaluate(config: LifecycleConfig, mus: list[float], jobs: int) -> list[float]:
    if jobs > 1 and len(mus) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_lb_at, [(config, m) for m in mus]))
    return [_lb_at((config, m)) for m in mus]


def optimize_mbu(config: LifecycleConfig, jobs: int = 1) -> tuple[float, LifeTrace]:
    """Grid search for the MBU maximizing life-cycle benefit, then refine.

    The coarse grid's best point and its neighbours bracket a golden-section
    search. The returned MBU is the best of every evaluated point, ties going
    to the smaller value, so the result does not depend on evaluation order.
    """
    grid = config.mbu_grid
    mus = [float(m) for m in grid.grid(config.prices, config.params.eta0)]
    seen = dict(zip(mus, _evaluate(config, mus, jobs)))
    best = max(range(len(mus)), key=lambda i: (seen[mus[i]], -i))
    if grid.refine and len(mus) > 1:
        lo = mus[max(best - 1, 0)]
        hi = mus[min(best + 1, len(mus) - 1)]

        def f(mu: float) -> float:
            if mu not in seen:
                seen[mu] = _lb_at((config, mu))
            return seen[mu]

        tol = grid.rel_tol * max(hi, 1e-12)
        a, b = lo, hi
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        while b - a > tol:
            if f(c) >= f(d):
                b, d = d, c
                c = b - GOLDEN * (b - a)
            else:
                a, c = c, d
                d = a + GOLDEN * (b - a)
    mu_star = min(seen, key=lambda m: (-seen[m], m))
    return mu_star, simulate_life(config, mu_star)


def retire_and_rerun(config: LifecycleConfig, jobs: int = 1) -> LifeTrace:
    """Optimal-MBU life truncated at the economic EOL when it comes first.

    The returned trace keeps the physical EOL year of the untruncated policy
    and sets ``retired_year`` when truncation happened.
    """
    mu_star, full = optimize_mbu(config, jobs=jobs)
    return retire(config, mu_star, full)


def retire(config: LifecycleConfig, mu_star: float, full: LifeTrace) -> LifeTrace:
    """Truncate an already-simulated optimal life at its economic EOL."""
    eol = full.economic_eol_year
    if eol is None or (full.physical_eol_year is not None and eol >= full.physical_eol_year):
        return full
    cut = simulate_life(config, mu_star, retire_after_years=eol)
    cut.physical_eol_year = full.physical_eol_year
    cut.retired_year = eol
    cut.economic_eol_year = eol
    return cut


def with_params(config: LifecycleConfig, **changes) -> LifecycleConfig:
    """Copy of ``config`` with degradation parameters replaced."""
    return replace(config, params=replace(config.params, **changes))
