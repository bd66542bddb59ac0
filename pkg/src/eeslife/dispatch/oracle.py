"""Independent checks on :func:`solve_day`.

``brute_force_day`` discretizes SOC and enumerates transitions on the grid,
so it shares nothing with the segment-merging solver.
``marginal_value_check`` re-solves the day as a plain LP with the daily
throughput pinned and compares the slope of revenue against the penalty.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from ..errors import DomainError
from .solver import IDLE_TOL, DayProblem, DispatchResult, build_result, idle_result, _idle_feasible


def _transition_candidates(p_max, eta, delta, power_levels):
    """Candidate (p_dis, p_cha) pairs realizing each SOC change in ``delta``.

    Scans the discharge power over ``power_levels`` evenly spaced values
    between its feasible bounds; the matching charge power follows from the
    SOC change. Returns stacked arrays (levels, *delta.shape) and a mask of
    feasible candidates.
    """
    d_lo = np.maximum(0.0, -delta * eta)
    d_hi = np.minimum(p_max, eta * (p_max * eta - delta))
    feasible = d_hi >= d_lo - 1e-12
    d_hi = np.maximum(d_hi, d_lo)
    t = np.linspace(0.0, 1.0, power_levels).reshape(-1, *([1] * delta.ndim))
    d = d_lo + t * (d_hi - d_lo)
    c = (delta + d / eta) / eta
    ok = feasible & (c >= -1e-12) & (c <= p_max + 1e-12)
    return np.clip(d, 0.0, p_max), np.clip(c, 0.0, p_max), ok


def _interp(levels: np.ndarray, value: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of grid values; -inf outside support."""
    finite = np.isfinite(value)
    out = np.full(y.shape, -np.inf)
    if not finite.any():
        return out
    lo = levels[finite][0]
    hi = levels[finite][-1]
    inside = (y >= lo - 1e-12) & (y <= hi + 1e-12)
    out[inside] = np.interp(np.clip(y[inside], lo, hi), levels[finite], value[finite])
    return out


def _lattice(problem: DayProblem, depth: int) -> np.ndarray:
    """SOC values reachable from the natural anchors by whole full-power hours.

    Bang-bang schedules visit these points, so putting them on the grid
    removes most of the interpolation loss near value-function kinks.
    """
    st = problem.state
    up = st.p_max * st.eta
    down = st.p_max / st.eta
    steps = np.arange(-depth, depth + 1)
    moves = (steps[:, None] * up + steps[None, :] * down).ravel()
    anchors = np.array([0.0, st.e_max, problem.e_start, problem.e_end_min])
    pts = (anchors[:, None] + moves[None, :]).ravel()
    return pts[(pts >= 0.0) & (pts <= st.e_max)]


def brute_force_day(
    problem: DayProblem, soc_levels: int = 401, power_levels: int = 2, lattice: int = 4
) -> DispatchResult:
    """Lower-bound optimum by dynamic programming on (hour, SOC level).

    From every grid level the DP tries every grid-to-grid transition plus
    full-power charge, full-power discharge and idle, scoring off-grid end
    states by linear interpolation of the next hour's grid values. Because
    the day problem is linear, mixing the optimal controls of the two
    bracketing grid levels is feasible from any SOC in between and earns at
    least the interpolated value, so the returned schedule is feasible and
    its objective never exceeds the true optimum. Refining the grid closes
    the gap from below.

    ``soc_levels`` uniform levels are augmented with the full-power lattice
    of depth ``lattice`` (see :func:`_lattice`); pass 0 for a purely
    uniform grid.
    """
    if soc_levels < 2 or power_levels < 2:
        raise DomainError("soc_levels and power_levels must be >= 2")
    st = problem.state
    levels = np.linspace(0.0, st.e_max, soc_levels)
    step = levels[1]
    pos = problem.e_start / step
    if abs(pos - round(pos)) > 1e-6:
        raise DomainError(
            f"e_start={problem.e_start} is not on the {soc_levels}-level SOC grid (step {step})"
        )
    if lattice > 0:
        levels = np.union1d(levels, _lattice(problem, lattice))
        keep = np.concatenate([[True], np.diff(levels) > 1e-9])
        levels = levels[keep]
    n_levels = levels.size
    a = 1.0 - problem.rho
    eta = st.eta
    n = problem.hours
    carried = a * levels
    targets = np.concatenate(
        [
            np.broadcast_to(levels, (n_levels, n_levels)),
            np.stack([carried + st.p_max * eta, carried - st.p_max / eta, carried], axis=1),
        ],
        axis=1,
    )
    in_range = (targets >= -1e-12) & (targets <= st.e_max + 1e-12)
    delta = targets - carried[:, None]
    value = np.where(levels >= problem.e_end_min - 1e-9, 0.0, -np.inf)
    policy = []
    rows = np.arange(n_levels)
    cand_d, cand_c, cand_ok = _transition_candidates(st.p_max, eta, delta, power_levels)
    blocked = np.where(cand_ok & in_range, 0.0, -np.inf)
    pen = problem.penalty
    for h in range(n - 1, -1, -1):
        lam = problem.prices[h]
        r = np.full(delta.shape, -np.inf)
        pick = np.zeros(delta.shape, dtype=np.intp)
        for k in range(power_levels):
            rk = (lam - pen) * cand_d[k] - (lam + pen) * cand_c[k] + blocked[k]
            better = rk > r
            r = np.where(better, rk, r)
            pick[better] = k
        cont = _interp(levels, value, targets.ravel()).reshape(targets.shape)
        total = r + cont
        best = np.argmax(total, axis=1)
        value = total[rows, best]
        k = pick[rows, best]
        policy.append((cand_d[k, rows, best], cand_c[k, rows, best]))
    policy.reverse()
    obj = float(_interp(levels, value, np.array([problem.e_start]))[0])
    if not np.isfinite(obj):
        raise DomainError("no grid schedule meets the terminal SOC requirement")
    if obj <= IDLE_TOL and _idle_feasible(problem):
        return idle_result(problem)
    # roll the mixed grid policy forward from the actual SOC
    p_dis = np.zeros(n)
    p_cha = np.zeros(n)
    e = problem.e_start
    for h in range(n):
        j = min(max(int(np.searchsorted(levels, e, side="right")) - 1, 0), n_levels - 2)
        w = min(max((e - levels[j]) / (levels[j + 1] - levels[j]), 0.0), 1.0)
        d_grid, c_grid = policy[h]
        p_dis[h] = min((1.0 - w) * d_grid[j] + w * d_grid[j + 1], st.p_max)
        p_cha[h] = min((1.0 - w) * c_grid[j] + w * c_grid[j + 1], st.p_max)
        e = min(max(a * e + p_cha[h] * eta - p_dis[h] / eta, 0.0), st.e_max)
    return build_result(problem, p_dis, p_cha, idle=False)


def pinned_throughput_revenue(problem: DayProblem, throughput: float) -> float | None:
    """Maximum gross revenue with daily throughput fixed; ``None`` if infeasible."""
    n = problem.hours
    st = problem.state
    a = 1.0 - problem.rho
    eta = st.eta
    lam = problem.prices
    # soc_h = a^(h+1) e0 + sum_{k<=h} a^(h-k) (eta c_k - d_k / eta)
    hh = np.arange(n)
    decay = np.where(hh[:, None] >= hh[None, :], a ** (hh[:, None] - hh[None, :]).clip(0), 0.0)
    A = np.hstack([-decay / eta, decay * eta])
    base = problem.e_start * a ** (hh + 1)
    term_lo = np.zeros(n)
    term_lo[-1] = problem.e_end_min
    A_ub = np.vstack([A, -A])
    b_ub = np.concatenate([st.e_max - base, base - term_lo])
    res = linprog(
        np.concatenate([-lam, lam]),
        A_ub=A_ub,
        b_ub=b_ub,
        A_eq=np.ones((1, 2 * n)),
        b_eq=[throughput],
        bounds=[(0.0, st.p_max)] * (2 * n),
        method="highs",
    )
    if res.status != 0:
        return None
    return -float(res.fun)


def marginal_value_check(problem: DayProblem, result: DispatchResult, eps: float = 1e-4) -> float:
    """Distance of the penalty from the revenue superdifferential at the optimum.

    Revenue as a function of pinned throughput is concave and piecewise
    linear, so optimality of a penalized schedule means the penalty sits
    between the right and left finite-difference slopes. Returns 0 when it
    does, otherwise the shortfall in $/kWh. Where revenue is smooth this
    equals ``|central difference - penalty|``.
    """
    if result.idle:
        raise DomainError("marginal value check needs a non-idle result")
    t = result.throughput
    r0 = pinned_throughput_revenue(problem, t)
    r_lo = pinned_throughput_revenue(problem, t - eps) if t > eps else None
    r_hi = pinned_throughput_revenue(problem, t + eps)
    if r0 is None or r_lo is None or r_hi is None:
        raise DomainError(f"throughput {t} +/- {eps} kWh is infeasible")
    left = (r0 - r_lo) / eps
    right = (r_hi - r0) / eps
    return max(0.0, problem.penalty - left, right - problem.penalty)
