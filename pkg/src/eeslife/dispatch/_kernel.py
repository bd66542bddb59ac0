"""Exact single-day arbitrage by backward recursion on concave value functions.

The value-to-go V_h(e) of a day's dispatch problem is concave and piecewise
linear in the state of charge. One hour of dispatch is the sup-convolution of
V_h with a two-piece concave reward in the SOC change (one piece for charging,
one for discharging), which for concave piecewise-linear functions is a merge
of their segments by decreasing slope. Self-discharge rescales the argument
and [0, e_max] clips the domain. Each V_h therefore stays a short sorted
segment list and the recursion is exact.
"""

import numpy as np
from numba import njit

OK = 0
INFEASIBLE = 1
_TINY = 1e-12


@njit(cache=True)
def solve_kernel(prices, p_max, e_max, eta, penalty, rho, e_start, e_end_min):
    """Return (status, objective, p_dis, p_cha).

    ``objective`` is max sum(price*(dis - cha)) - penalty*sum(dis + cha).
    """
    n = prices.shape[0]
    m = 2 * n + 2
    a = 1.0 - rho
    u_len = np.zeros((n, m))
    u_slope = np.zeros((n, m))
    u_isv = np.zeros((n, m), dtype=np.bool_)
    u_n = np.zeros(n, dtype=np.int64)
    u_x0 = np.zeros(n)
    v_x0_at = np.zeros(n)
    p_dis = np.zeros(n)
    p_cha = np.zeros(n)

    if e_end_min > e_max + _TINY:
        return INFEASIBLE, 0.0, p_dis, p_cha
    v_len = np.zeros(m)
    v_slope = np.zeros(m)
    v_x0 = e_end_min
    v_f0 = 0.0
    v_n = 0
    if e_max - e_end_min > _TINY:
        v_len[0] = e_max - e_end_min
        v_n = 1

    for h in range(n - 1, -1, -1):
        lam = prices[h]
        # reward as a function of (SOC before - SOC after): charging piece
        # then discharging piece, ordered by decreasing slope
        l1 = p_max * eta
        s1 = (lam + penalty) / eta
        l2 = p_max / eta
        s2 = (lam - penalty) * eta
        if s2 > s1:
            l1, s1, l2, s2 = l2, s2, l1, s1
        g_x0 = -p_max * eta
        g_f0 = -(lam + penalty) * p_max

        k = 0
        i = 0
        j = 0
        while i < v_n or j < 2:
            take_v = False
            if j >= 2:
                take_v = True
            elif i < v_n:
                gs = s1 if j == 0 else s2
                take_v = v_slope[i] >= gs
            if take_v:
                u_len[h, k] = v_len[i]
                u_slope[h, k] = v_slope[i]
                u_isv[h, k] = True
                i += 1
            else:
                u_len[h, k] = l1 if j == 0 else l2
                u_slope[h, k] = s1 if j == 0 else s2
                j += 1
            k += 1
        u_n[h] = k
        u_x0[h] = v_x0 + g_x0
        v_x0_at[h] = v_x0
        f = v_f0 + g_f0

        # previous-hour value: U(a*x) restricted to [0, e_max]
        x = u_x0[h] / a
        idx = 0
        cut = 0.0
        if x < 0.0:
            while idx < k:
                seg = u_len[h, idx] / a
                if x + seg > 0.0:
                    cut = -x
                    f += cut * u_slope[h, idx] * a
                    x = 0.0
                    break
                f += seg * u_slope[h, idx] * a
                x += seg
                idx += 1
            if idx == k:
                if x < -_TINY:
                    return INFEASIBLE, 0.0, p_dis, p_cha
                x = 0.0
        if x > e_max + _TINY:
            return INFEASIBLE, 0.0, p_dis, p_cha
        v_x0 = x
        v_f0 = f
        v_n = 0
        pos = x
        while idx < k and pos < e_max:
            seg = min(u_len[h, idx] / a - cut, e_max - pos)
            cut = 0.0
            if seg > _TINY:
                v_len[v_n] = seg
                v_slope[v_n] = u_slope[h, idx] * a
                v_n += 1
                pos += seg
            idx += 1

    # value at e_start
    hi = v_x0
    for i in range(v_n):
        hi += v_len[i]
    if e_start < v_x0 - 1e-9 or e_start > hi + 1e-9:
        return INFEASIBLE, 0.0, p_dis, p_cha
    obj = v_f0
    pos = v_x0
    for i in range(v_n):
        step = min(v_len[i], e_start - pos)
        if step <= 0.0:
            break
        obj += step * v_slope[i]
        pos += step

    # forward pass: split each hour's convolution optimum
    soc = e_start
    for h in range(n):
        y = a * soc
        rem = y - u_x0[h]
        vpart = 0.0
        for idx in range(u_n[h]):
            if rem <= 0.0:
                break
            step = min(u_len[h, idx], rem)
            if u_isv[h, idx]:
                vpart += step
            rem -= step
        z = v_x0_at[h] + vpart
        delta = z - y
        lam = prices[h]
        kappa = (lam - penalty) - (lam + penalty) / (eta * eta)
        if kappa <= 0.0:
            if delta >= 0.0:
                c = delta / eta
                d = 0.0
            else:
                c = 0.0
                d = -delta * eta
        elif delta <= p_max * eta - p_max / eta:
            d = p_max
            c = (delta + p_max / eta) / eta
        else:
            c = p_max
            d = (p_max * eta - delta) * eta
        p_cha[h] = min(max(c, 0.0), p_max)
        p_dis[h] = min(max(d, 0.0), p_max)
        soc = a * soc + p_cha[h] * eta - p_dis[h] / eta
        soc = min(max(soc, 0.0), e_max)
    return OK, obj, p_dis, p_cha
