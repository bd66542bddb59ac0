import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eeslife.battery import (
    BatteryState,
    DegradationParams,
    apply_wear,
    calendar_increment,
    cycle_degradation,
    cycle_life,
    efficiency,
    power_capacity,
    throughput_budget,
)
from eeslife.errors import DomainError


class TestCycleLife:
    @pytest.mark.parametrize("dod, expected", [(1.0, 3000.0), (0.1, 30000.0), (0.5, 6000.0)])
    def test_baseline_law(self, dod, expected):
        assert cycle_life(dod) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("dod", [0.0, -0.1, 1.01])
    def test_domain(self, dod):
        with pytest.raises(DomainError):
            cycle_life(dod)

    def test_budget_consistency(self, params):
        D = throughput_budget(params)
        for i in range(1, 11):
            dod = i / 10
            assert cycle_life(dod, params) * 2 * params.rated_energy * dod == pytest.approx(D, rel=1e-12)


class TestBudgetAndWear:
    @pytest.mark.parametrize(
        "energy, n100, expected", [(4.0, 3000, 24000.0), (1.0, 1, 2.0), (4.0, 1500, 12000.0)]
    )
    def test_throughput_budget(self, energy, n100, expected):
        assert throughput_budget(DegradationParams(rated_energy=energy, n100=n100)) == expected

    def test_cycle_degradation_k1_is_throughput(self, params):
        assert cycle_degradation(8.0, 4.0, params) == 8.0
        assert cycle_degradation(0.0, 4.0, params) == 0.0

    def test_cycle_degradation_k2(self):
        # 2 * e_max * (throughput / (2 e_max))**2 = 2 * 4 * 0.25
        assert cycle_degradation(4.0, 4.0, DegradationParams(dod_exponent=-2.0)) == pytest.approx(2.0)

    def test_negative_throughput(self, params):
        with pytest.raises(DomainError):
            cycle_degradation(-1.0, 4.0, params)

    def test_calendar_year_is_800(self, params):
        # 1 % of capacity out of a 30 % capacity budget = 1/30 of 24000 kWh
        assert calendar_increment(365, params) == pytest.approx(24000 / 30)
        assert calendar_increment(0, params) == 0.0
        assert calendar_increment(1000, DegradationParams(calendar_rate=0.0)) == 0.0


class TestClosedForms:
    def test_efficiency_at_eol(self):
        assert efficiency(0.9, 2.0) == pytest.approx(0.8182, abs=1e-4)

    def test_round_trip_at_eol(self):
        assert efficiency(0.9, 2.0) ** 2 == pytest.approx(0.6695, abs=0.01)

    def test_efficiency_identity_and_value(self):
        assert efficiency(0.9, 1.0) == pytest.approx(0.9)
        assert efficiency(0.8, 1.5) == pytest.approx(1 / 1.375)

    @pytest.mark.parametrize("eta0", [0.0, 1.5])
    def test_efficiency_domain(self, eta0):
        with pytest.raises(DomainError):
            efficiency(eta0, 1.0)

    @pytest.mark.parametrize("p0, z, expected", [(1.0, 2.0, 0.5), (1.0, 1.0, 1.0), (2.0, 1.25, 1.6)])
    def test_power_capacity(self, p0, z, expected):
        assert power_capacity(p0, z) == pytest.approx(expected)

    @given(st.floats(0.05, 0.999), st.floats(1.0, 10.0), st.floats(1e-3, 5.0))
    def test_efficiency_decreasing(self, eta0, z, dz):
        assert efficiency(eta0, z + dz) < efficiency(eta0, z) <= eta0 + 1e-15

    @given(st.floats(0.01, 100.0), st.floats(1.0, 10.0))
    def test_power_law_exact_inverse(self, p0, z):
        assert power_capacity(p0, z) * z == pytest.approx(p0, rel=1e-15)


class TestApplyWear:
    def test_full_budget_reaches_eol(self, params, fresh):
        s = apply_wear(fresh, throughput_budget(params), params)
        assert s.wear_u == 1.0 and s.at_eol
        assert s.soh == pytest.approx(0.70)
        assert s.z_ratio == pytest.approx(2.0)
        assert s.p_max == pytest.approx(0.5 * params.rated_power)
        assert s.eta == pytest.approx(0.8182, abs=1e-4)

    def test_zero_only_ages(self, params, fresh):
        s = apply_wear(fresh, 0.0, params)
        assert s.age_days == 1
        assert (s.wear_u, s.soh, s.e_max, s.p_max, s.eta) == (
            fresh.wear_u, fresh.soh, fresh.e_max, fresh.p_max, fresh.eta)

    def test_midpoint(self, params, fresh):
        s = apply_wear(fresh, throughput_budget(params) / 2, params)
        assert s.soh == pytest.approx(0.85)
        assert s.z_ratio == pytest.approx(1.5)
        assert s.eta == pytest.approx(1 / (1 + 1.5 / 9))

    def test_state_invariants(self, params):
        for u in (0.0, 0.3, 0.77, 1.0):
            s = BatteryState.at_wear(params, u)
            assert s.soh == pytest.approx(1 - 0.3 * u)
            assert s.z_ratio == pytest.approx(1 + u)
            assert s.e_max == pytest.approx(s.soh * 4.0)
            assert s.p_max == pytest.approx(1.0 / s.z_ratio)
            assert s.eta == pytest.approx(0.9 / (0.9 + s.z_ratio * 0.1))

    def test_saturates(self, params, fresh):
        assert apply_wear(fresh, 10 * throughput_budget(params), params).wear_u == 1.0

    def test_negative_rejected(self, params, fresh):
        with pytest.raises(DomainError):
            apply_wear(fresh, -1.0, params)

    @given(st.lists(st.floats(0.0, 5000.0), min_size=1, max_size=30))
    def test_monotone(self, steps):
        params = DegradationParams()
        s = BatteryState.fresh(params)
        for d in steps:
            nxt = apply_wear(s, d, params)
            assert nxt.wear_u >= s.wear_u
            assert nxt.soh <= s.soh and nxt.e_max <= s.e_max
            assert nxt.p_max <= s.p_max and nxt.eta <= s.eta
            s = nxt
        total = sum(steps)
        assert s.wear_u == pytest.approx(min(1.0, total / throughput_budget(params)), rel=1e-9, abs=1e-12)


class TestParams:
    @pytest.mark.parametrize("kw", [
        {"n100": 0}, {"eol_capacity_fraction": 1.0}, {"eol_impedance_ratio": 1.0},
        {"eta0": 0.0}, {"rated_energy": 0}, {"rated_power": -1}, {"n100": math.inf},
    ])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            DegradationParams(**kw)

    def test_k_from_exponent(self):
        assert DegradationParams().k == 1.0
