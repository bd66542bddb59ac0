from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..battery import BatteryState, DegradationParams, cycle_degradation
from ..errors import DomainError, InfeasibleError
from ._kernel import OK, solve_kernel

# objective values at or below this are treated as "not worth operating"
IDLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DayProblem:
    """One short-term dispatch problem.

    ``prices`` are hourly $/kWh; ``penalty`` is the discounted marginal
    benefit of usage in $ per kWh of throughput.
    """

    prices: np.ndarray
    state: BatteryState
    penalty: float = 0.0
    c_fix_daily: float = 0.0
    rho: float = 0.0
    e_start: float = 0.0
    e_end_min: float = 0.0
    params: DegradationParams | None = None

    def __post_init__(self) -> None:
        prices = np.ascontiguousarray(self.prices, dtype=float)
        if prices.ndim != 1 or prices.size == 0 or not np.all(np.isfinite(prices)):
            raise DomainError("prices must be a non-empty finite 1-d array")
        object.__setattr__(self, "prices", prices)
        if not 0.0 <= self.rho < 1.0:
            raise DomainError(f"rho must lie in [0, 1), got {self.rho}")
        if self.penalty < 0 or np.isnan(self.penalty):
            raise DomainError(f"penalty must be >= 0, got {self.penalty}")
        if not -1e-9 <= self.e_start <= self.state.e_max + 1e-9:
            raise DomainError(
                f"e_start {self.e_start} outside [0, e_max={self.state.e_max}]"
            )
        if self.e_end_min < 0:
            raise DomainError(f"e_end_min must be >= 0, got {self.e_end_min}")

    @property
    def hours(self) -> int:
        return self.prices.size

    def degradation_params(self) -> DegradationParams:
        return self.params or DegradationParams()


@dataclass(frozen=True, eq=False)
class DispatchResult:
    p_dis: np.ndarray
    p_cha: np.ndarray
    soc: np.ndarray
    gross_revenue: float
    throughput: float
    degradation: float
    sb_net: float
    idle: bool
    # penalized operating profit, before fixed O&M
    objective: float = 0.0


def soc_path(problem: DayProblem, p_dis: np.ndarray, p_cha: np.ndarray) -> np.ndarray:
    """Hourly end-of-hour SOC under the storage recursion."""
    eta = problem.state.eta
    a = 1.0 - problem.rho
    soc = np.empty(problem.hours)
    e = problem.e_start
    for h in range(problem.hours):
        e = a * e + p_cha[h] * eta - p_dis[h] / eta
        soc[h] = e
    return soc


def build_result(problem: DayProblem, p_dis: np.ndarray, p_cha: np.ndarray, idle: bool) -> DispatchResult:
    """Assemble accounting fields for a schedule."""
    lam = problem.prices
    throughput = float(p_dis.sum() + p_cha.sum())
    gross = float(lam @ (p_dis - p_cha))
    degradation = cycle_degradation(throughput, problem.state.e_max, problem.degradation_params())
    sb_net = gross - problem.penalty * degradation - problem.c_fix_daily
    return DispatchResult(
        p_dis=p_dis,
        p_cha=p_cha,
        soc=soc_path(problem, p_dis, p_cha),
        gross_revenue=gross,
        throughput=throughput,
        degradation=degradation,
        sb_net=sb_net,
        idle=idle,
        objective=gross - problem.penalty * throughput,
    )


def idle_result(problem: DayProblem) -> DispatchResult:
    zeros = np.zeros(problem.hours)
    return build_result(problem, zeros, zeros.copy(), idle=True)


def _idle_feasible(problem: DayProblem) -> bool:
    return problem.e_start * (1.0 - problem.rho) ** problem.hours >= problem.e_end_min - 1e-12


def solve_day(problem: DayProblem) -> DispatchResult:
    """Revenue-maximizing schedule under a linear throughput penalty.

    Maximizes ``sum(price * (dis - cha)) - penalty * sum(dis + cha)`` subject
    to the SOC recursion and the power and energy limits of ``problem.state``.
    Returns the idle schedule when operating cannot beat zero.

    Raises
    ------
    InfeasibleError
        If the terminal SOC requirement cannot be met.
    """
    st = problem.state
    if np.isinf(problem.penalty):
        if not _idle_feasible(problem):
            raise InfeasibleError("infinite penalty but idling misses the terminal SOC")
        return idle_result(problem)
    e_start = min(max(problem.e_start, 0.0), st.e_max)
    status, obj, p_dis, p_cha = solve_kernel(
        problem.prices, st.p_max, st.e_max, st.eta, problem.penalty,
        problem.rho, e_start, problem.e_end_min,
    )
    if status != OK:
        raise InfeasibleError(
            f"no schedule reaches e_end_min={problem.e_end_min} kWh from "
            f"e_start={problem.e_start} kWh within p_max={st.p_max} kW"
        )
    if obj <= IDLE_TOL and _idle_feasible(problem):
        return idle_result(problem)
    return build_result(problem, p_dis, p_cha, idle=False)
