"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION n: PASS|FAIL`` line before asserting.
Checks that need real 2016 CAISO day-ahead prices read the normalized CSV
named by ``EESLIFE_CAISO_CSV`` and are skipped when it is unset.
"""

import dataclasses
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from eeslife.analysis import economic_life, om_crossover, profitability_vs_soh, sweep_degradation, sweep_om
from eeslife.analysis import grid_values
from eeslife.battery import DegradationParams, cycle_life, efficiency, power_capacity, throughput_budget
from eeslife.cli import main, random_day_problem
from eeslife.config import load_config
from eeslife.dispatch import brute_force_day, marginal_value_check, solve_day
from eeslife.lifecycle import LifecycleConfig, economic_eol, npv, optimize_mbu, simulate_life
from eeslife.market import load_prices, price_stats

CAISO_ENV = "EESLIFE_CAISO_CSV"
OM_GRID = [float(v) for v in range(0, 31, 3)]
TIERS = {"utility": 9.0, "commercial": 16.0, "residential": 27.0}


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def caiso_prices():
    path = os.environ.get(CAISO_ENV)
    return load_prices(path) if path else None


@pytest.fixture(scope="module")
def baseline(reference_year):
    life = load_config(None).lifecycle(prices=reference_year)
    assert price_stats(reference_year).mean_daily_spread == pytest.approx(32.0, rel=0.05)
    return life


@pytest.fixture(scope="module")
def om_cells(baseline):
    """Optimal-MBU runs over the O&M grid plus the commercial tier, keyed by O&M."""
    res = sweep_om(baseline, sorted(set(OM_GRID) | set(TIERS.values())))
    return {c["om_usd_per_kw_yr"]: c for c in res.cells}


def test_criterion_1_closed_form_fade(capsys):
    eta = efficiency(0.9, 2.0)
    ratio = power_capacity(1.0, 2.0) / 1.0
    ok = abs(eta - 0.8182) <= 1e-4 and ratio == 0.50
    report(capsys, 1, ok, f"efficiency={eta:.5f} power ratio={ratio}")
    assert ok


def test_criterion_2_cycle_life_law(capsys):
    p = DegradationParams()
    D = throughput_budget(p)
    exact = cycle_life(1.0, p) == 3000 and cycle_life(0.1, p) == 30000
    dods = np.linspace(0.1, 1.0, 10)
    consistent = all(abs(cycle_life(d, p) * 2 * p.rated_energy * d - D) <= 1e-9 * D for d in dods)
    ok = exact and consistent
    report(capsys, 2, ok, f"N(1.0)={cycle_life(1.0, p)} N(0.1)={cycle_life(0.1, p)} budget-consistent={consistent}")
    assert ok


def test_criterion_3_dispatch_exactness(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst_gap = 0.0
    below = 0
    worst_residual = 0.0
    interior = 0
    for _ in range(100):
        prob = random_day_problem(rng)
        exact = solve_day(prob)
        grid = brute_force_day(prob, soc_levels=401)
        if exact.objective < grid.objective - 1e-12:
            below += 1
        if not exact.idle:
            worst_gap = max(worst_gap, (exact.objective - grid.objective) / exact.objective)
            worst_residual = max(worst_residual, marginal_value_check(prob, exact))
            interior += 1
    elapsed = time.perf_counter() - t0
    ok = below == 0 and worst_gap <= 0.005 and worst_residual <= 1e-3 and elapsed < 60
    report(capsys, 3, ok, f"max gap={worst_gap:.2e} solver<oracle on {below} max KKT residual="
                          f"{worst_residual:.2e} over {interior} non-idle days, {elapsed:.0f}s")
    assert ok


def test_criterion_4_profitability_fade(capsys, baseline):
    t0 = time.perf_counter()
    res = profitability_vs_soh(baseline, (1.0, 0.7))
    g1, g07 = res.cells[0]["gross_usd_per_kw_yr"], res.cells[1]["gross_usd_per_kw_yr"]
    ratio = g07 / g1
    ok = abs(ratio - 0.80) <= 0.05
    detail = f"synthetic: revenue(0.70)/revenue(1.00)={ratio:.3f} (${g1:.2f}/kW -> ${g07:.2f}/kW)"
    real = caiso_prices()
    if real is not None:
        cells = profitability_vs_soh(replace(baseline, prices=real), (1.0, 0.7)).cells
        r1 = cells[0]["gross_usd_per_kw_yr"]
        real_ratio = cells[1]["gross_usd_per_kw_yr"] / r1
        ok = ok and abs(real_ratio - 0.80) <= 0.05 and abs(r1 - 30.0) <= 6.0
        detail += f"; CAISO: ratio={real_ratio:.3f} revenue(1.00)=${r1:.2f}/kW"
    else:
        detail += f"; absolute $30/kW check skipped (set {CAISO_ENV})"
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 60
    report(capsys, 4, ok, detail + f", {elapsed:.0f}s")
    assert ok


def test_criterion_5_eol_tiers(capsys, om_cells):
    lives = {k: economic_life(om_cells[v]) for k, v in TIERS.items()}
    ok = lives["utility"] > lives["commercial"] > lives["residential"] == 1
    detail = "synthetic lives " + " ".join(f"{k}={v}" for k, v in lives.items())
    detail += f" (utility physical EOL {om_cells[9.0]['phys_eol_yr']})"
    real = caiso_prices()
    if real is not None:
        life = load_config(None).lifecycle(prices=real)
        cells = {k: sweep_om(life, [v]).cells[0] for k, v in TIERS.items()}
        phys = cells["utility"]["phys_eol_yr"]
        com = economic_life(cells["commercial"])
        res = economic_life(cells["residential"])
        ok = ok and phys is not None and abs(phys - 8) <= 1 and abs(com - 5) <= 1 and abs(res - 1) <= 1
        detail += f"; CAISO: utility physical={phys} commercial={com} residential={res}"
    else:
        detail += f"; CAISO check skipped (set {CAISO_ENV})"
    report(capsys, 5, ok, detail)
    assert ok


def _om_shape(cells, grid):
    lives = [economic_life(cells[v]) for v in grid]
    monotone = all(b <= a for a, b in zip(lives, lives[1:]))
    return lives, monotone


@pytest.mark.slow
def test_criterion_6_om_sweep(capsys, om_cells):
    lives, monotone = _om_shape(om_cells, OM_GRID)
    crossover = next((v for v in OM_GRID if om_cells[v]["econ_eol_yr"] is not None
                      and om_cells[v]["econ_eol_yr"] < om_cells[v]["phys_eol_yr"]), None)
    ok = monotone and lives[0] >= 10 and lives[-1] == 1 and crossover is not None and abs(crossover - 12) <= 3
    detail = f"economic life over O&M 0..30: {lives}, economic<physical from ${crossover}/kW-yr"
    real = caiso_prices()
    if real is not None:
        res = sweep_om(load_config(None).lifecycle(prices=real), OM_GRID)
        real_lives = [economic_life(c) for c in res.cells]
        cross = om_crossover(res)
        ok = ok and all(b <= a for a, b in zip(real_lives, real_lives[1:]))
        ok = ok and abs(real_lives[0] - 11) <= 1 and abs(real_lives[-1] - 1) <= 1
        ok = ok and cross is not None and abs(cross - 12) <= 3
        detail += f"; CAISO: {real_lives}, crossover ${cross}"
    report(capsys, 6, ok, detail)
    assert ok


def test_criterion_6_om_sweep_ci_variant(capsys, baseline):
    grid = [0.0, 9.0, 18.0, 30.0]
    t0 = time.perf_counter()
    res = sweep_om(baseline, grid)
    elapsed = time.perf_counter() - t0
    cells = {c["om_usd_per_kw_yr"]: c for c in res.cells}
    lives, monotone = _om_shape(cells, grid)
    ok = monotone and lives[0] >= 10 and lives[-1] == 1 and elapsed < 300
    report(capsys, "6 (CI 4-point)", ok, f"economic life at O&M {grid}: {lives}, {elapsed:.0f}s")
    assert ok


def test_criterion_7_sensitivity_signs(capsys, baseline):
    t0 = time.perf_counter()
    caps, rates = [1500.0, 3000.0, 6000.0], [0.0, 0.01, 0.03]
    res = sweep_degradation(baseline, caps, rates)
    lb = grid_values(res, "lb_usd_per_kw")
    ab = grid_values(res, "abu_usd_per_kwh")
    lb_n = bool(np.all(np.diff(lb, axis=0) > 0))
    lb_c = bool(np.all(np.diff(lb, axis=1) < 0))
    ab_n = bool(np.all(np.diff(ab, axis=0) < 0))
    ab_c = bool(np.all(np.diff(ab, axis=1) < 0))
    gain = np.diff(lb, axis=0)
    shrink = bool(np.all(gain[:, -1] < gain[:, 0]))
    elapsed = time.perf_counter() - t0
    ok = lb_n and lb_c and ab_n and ab_c and shrink and elapsed < 600
    report(capsys, 7, ok, f"lb up in n100={lb_n} lb down in cal={lb_c} abu down in n100={ab_n} "
                          f"abu down in cal={ab_c} smaller n100 gain at high cal={shrink}, {elapsed:.0f}s "
                          f"lb/kW={np.round(lb, 1).tolist()}")
    assert ok


def test_criterion_8_framework_invariants(capsys, baseline, tmp_path):
    checks = {}
    names = [f.name for f in dataclasses.fields(LifecycleConfig)]
    mu_star, trace = optimize_mbu(baseline)
    checks["no capital-cost input"] = not any("capital" in n for n in names)
    checks["EOL invariant to capital offset"] = all(
        economic_eol(trace.annual) == trace.economic_eol_year and npv(trace, c) == trace.lb - c
        for c in (0.0, 150.0, 1e4))

    grid = baseline.mbu_grid.grid(baseline.prices, baseline.params.eta0)
    sampled = [simulate_life(baseline, float(m)) for m in grid]
    checks["lb(mu*) >= lb(mu) on grid"] = all(trace.lb >= s.lb for s in sampled)
    budget_ok = floor_ok = True
    for s in sampled + [trace]:
        budget_ok &= s.used <= s.budget * (1 + 1e-12)
        days = s.degradation[:-1] if s.physical_eol_year is not None else s.degradation
        floor_ok &= bool(np.all(days >= s.calendar[: days.size] - 1e-15))
    checks["budget never exceeded"] = budget_ok
    checks["daily calendar floor"] = floor_ok

    cfg = tmp_path / "run.ini"
    cfg.write_text("[search]\ngrid_points = 8\n")
    for name in ("a", "b"):
        assert main(["optimize", str(cfg), "--out", str(tmp_path / name)]) == 0
    checks["byte-identical reruns"] = all(
        (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
        for f in ("daily.csv", "annual.csv", "summary.json"))

    ok = all(checks.values())
    report(capsys, 8, ok, " ".join(f"[{k}: {'ok' if v else 'FAIL'}]" for k, v in checks.items()))
    assert ok
