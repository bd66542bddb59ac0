"""Single-day arbitrage dispatch and its validation oracles."""

from .oracle import brute_force_day, marginal_value_check, pinned_throughput_revenue
from .solver import DayProblem, DispatchResult, build_result, idle_result, solve_day

__all__ = [
    "DayProblem",
    "DispatchResult",
    "brute_force_day",
    "build_result",
    "idle_result",
    "marginal_value_check",
    "pinned_throughput_revenue",
    "solve_day",
]
