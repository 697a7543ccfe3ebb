from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from solarev.core import build_scenario
from solarev.dispatch import EnergyFlows, dispatch_hour, simulate_year
from solarev.economics import energy_indicators, npv
from solarev.fleet import AvailabilityProfile, FleetState, availability, apply_degradation, fleet_limits
from solarev.sweep import coverage_to_capacity

energy = st.floats(0.0, 1e4, allow_nan=False)
fraction = st.floats(0.0, 1.0)


@st.composite
def fleets(draw):
    n = draw(st.integers(1, 500))
    cap = draw(st.floats(5.0, 100.0))
    lo = draw(st.floats(0.0, 0.6))
    hi = draw(st.floats(lo + 0.05, 1.0))
    state = FleetState.initial(n, cap, lo, hi)
    state = dataclasses.replace(state, fade=draw(st.floats(0.81, 1.0)))
    w_lo, w_hi = state.window
    return dataclasses.replace(state, soc=w_lo + draw(fraction) * (w_hi - w_lo))


class TestDispatchHour:
    @settings(max_examples=300, deadline=None)
    @given(pv=energy, load=energy, fleet=fleets(), avail=fraction, power=st.floats(0.0, 22.0),
           cap=st.one_of(st.none(), energy))
    def test_conservation_and_window(self, pv, load, fleet, avail, power, cap):
        limits = fleet_limits(fleet, avail, power)
        f, after = dispatch_hour(pv, load, fleet, limits, export_cap=cap)
        flows = dataclasses.astuple(f)
        assert min(flows) >= 0.0
        scale = max(pv, load, 1.0)
        assert abs(f.pv_to_load + f.pv_to_batt + f.pv_to_grid + f.curtailed - pv) <= 1e-9 * scale
        assert abs(f.pv_to_load + f.batt_to_load + f.grid_to_load - load) <= 1e-9 * scale
        lo, hi = fleet.window
        assert lo - 1e-9 * hi <= after.soc <= hi * (1 + 1e-9)
        assert f.pv_to_batt == 0.0 or f.batt_to_load == 0.0
        if cap is not None:
            assert f.pv_to_grid <= cap
        else:
            assert f.curtailed == 0.0

    @settings(max_examples=100, deadline=None)
    @given(pv=energy, load=energy, fleet=fleets(), avail=fraction)
    def test_fit_flag_never_changes_flows(self, pv, load, fleet, avail):
        limits = fleet_limits(fleet, avail, 7.0)
        assert dispatch_hour(pv, load, fleet, limits, True) == dispatch_hour(pv, load, fleet, limits, False)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_year_fold_conservation(self, seed):
        rng = np.random.default_rng(seed)
        n = 24 * 14
        pv = np.clip(rng.normal(20, 25, n), 0, None)
        load = rng.uniform(1, 30, n)
        cfg = build_scenario({"system": "PVEV"})
        fleet = FleetState.initial(3, 40.0)
        flows, after = simulate_year(pv, load, fleet, cfg, AvailabilityProfile(0.35))
        np.testing.assert_allclose(flows.pv_to_load + flows.pv_to_batt + flows.pv_to_grid + flows.curtailed, pv,
                                   rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(flows.pv_to_load + flows.batt_to_load + flows.grid_to_load, load, rtol=1e-9)
        lo, hi = fleet.window
        assert flows.soc.min() >= lo - 1e-9 and flows.soc.max() <= hi + 1e-9
        charged = flows.pv_to_batt.sum() * 0.95
        assert flows.batt_to_load.sum() <= (charged + fleet.soc - lo) * 0.95 + 1e-9


# ---------------------------------------------------------------------------
# Indicators and economics
# ---------------------------------------------------------------------------


class TestIndicators:
    @settings(max_examples=1000, deadline=None)
    @given(direct=energy, batt=energy, export=energy, extra_load=st.floats(0.0, 1e4))
    def test_ss_is_sc_times_es(self, direct, batt, export, extra_load):
        load = direct + batt + extra_load
        assume(load >= 1e-3)
        z = np.zeros(1)
        flows = EnergyFlows(np.array([direct]), z, np.array([export]), np.array([batt]),
                            np.array([extra_load]), z, load=np.array([load]), pv=np.array([direct + export]))
        sc, ss, es = energy_indicators(flows)
        assert ss <= es + 1e-15
        if direct + batt + export == 0:
            assert sc is None
        else:
            assert sc is not None
            assert ss == pytest.approx(sc * es, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(a=st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30), k=st.floats(-10, 10),
           rate=st.floats(0.0, 0.2))
    def test_npv_linear(self, a, k, rate):
        x = np.array(a)
        y = np.random.default_rng(len(a)).normal(size=x.size) * 1e5
        lhs = npv(x + k * y, rate)
        rhs = npv(x, rate) + k * npv(y, rate)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-3)

    @given(roof=st.floats(0.0, 1e9), c1=st.floats(0.0, 5 / 7), c2=st.floats(0.0, 5 / 7))
    def test_capacity_linear_in_coverage(self, roof, c1, c2):
        total = coverage_to_capacity(roof, c1) + coverage_to_capacity(roof, c2)
        assert total == pytest.approx(roof * (c1 + c2) / 5.0, rel=1e-12, abs=1e-9)


class TestFleetProperties:
    @given(hour=st.integers(0, 8760 - 169), use=fraction)
    def test_availability_weekly_period(self, hour, use):
        profile = AvailabilityProfile(use)
        a = availability(hour, profile)
        assert a == availability(hour + 168, profile)
        assert 0.0 <= a <= 1.0

    @given(fleet=fleets(), removed=st.floats(0.0, 1e7))
    def test_degradation_keeps_soc_fraction(self, fleet, removed):
        after = apply_degradation(fleet, removed, 0.2 / 3000)
        assert after.soc_fraction == pytest.approx(fleet.soc_fraction, rel=1e-9)
        assert 0.8 < after.fade <= 1.0
