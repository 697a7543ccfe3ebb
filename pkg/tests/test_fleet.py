from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from solarev.core import ValidationError, build_scenario, region_preset
from solarev.fleet import (
    AvailabilityProfile,
    FleetState,
    apply_degradation,
    availability,
    availability_series,
    build_scenario_demand,
    ev_annual_energy,
    fleet_limits,
)

# 2019-01-01 is a Tuesday, so day 4 (Jan 5) is a Saturday and day 6 a Monday
SATURDAY = 4
MONDAY = 6


class TestEvEnergy:
    def test_paris(self):
        e = ev_annual_energy(region_preset("Paris"), 17.2)
        # 585e3 cars x 0.35 x 21.8 km x 365 d x 0.172 kWh/km
        assert e == pytest.approx(280_221_669.0, rel=1e-9)
        assert e / region_preset("Paris").annual_demand == pytest.approx(0.02, abs=0.005)

    def test_idf(self):
        p = region_preset("IleDeFrance")
        e = ev_annual_energy(p, 17.2)
        assert e == pytest.approx(5.54e9, rel=0.01)
        assert 0.07 <= e / p.annual_demand <= 0.08

    def test_no_vehicles(self):
        p = dataclasses.replace(region_preset("Paris"), n_vehicles=0, n_gasoline=0, n_diesel=0)
        assert ev_annual_energy(p, 17.2) == 0.0

    def test_bad_efficiency(self):
        with pytest.raises(ValidationError):
            ev_annual_energy(region_preset("Paris"), 0.0)


class TestScenarioDemand:
    def test_pvonly_unchanged(self, paris):
        c = build_scenario({"system": "PVOnly"})
        assert build_scenario_demand(paris.demand, c, paris.profile) is paris.demand

    def test_fixed_factor(self, idf):
        c = build_scenario({"demand_mode": "fixed_factor"})
        out = build_scenario_demand(idf.demand, c, idf.profile)
        assert out.total() == pytest.approx(1.08 * idf.demand.total(), rel=1e-12)

    def test_paris_uplift(self, paris):
        out = build_scenario_demand(paris.demand, build_scenario({}), paris.profile)
        assert out.total() / paris.demand.total() == pytest.approx(1.02, abs=0.005)

    def test_shape_preserved(self, paris):
        out = build_scenario_demand(paris.demand, build_scenario({}), paris.profile)
        ratio = out.values / paris.demand.values
        assert np.ptp(ratio) < 1e-12

    def test_unknown_mode(self, paris):
        with pytest.raises(ValidationError, match="unknown demand mode"):
            build_scenario_demand(paris.demand, build_scenario({}), paris.profile, mode="bogus")


class TestAvailability:
    def test_paris_weekday_noon(self):
        assert availability(MONDAY * 24 + 12, AvailabilityProfile(0.35)) == pytest.approx(0.65)

    def test_saturday_noon(self):
        assert availability(SATURDAY * 24 + 12, AvailabilityProfile(0.35)) == 1.0

    def test_idf_weekday_morning(self):
        assert availability(MONDAY * 24 + 10, AvailabilityProfile(0.63)) == pytest.approx(0.37)

    def test_window_edges(self):
        p = AvailabilityProfile(0.5)
        assert availability(MONDAY * 24 + 7, p) == 1.0
        assert availability(MONDAY * 24 + 8, p) == 0.5
        assert availability(MONDAY * 24 + 17, p) == 0.5
        assert availability(MONDAY * 24 + 18, p) == 1.0

    def test_weekly_period(self):
        a = availability_series(AvailabilityProfile(0.35, weekend_fraction_away=0.1))
        assert np.array_equal(a[168:], a[:-168])

    def test_leap_year_calendar(self):
        # 2020: Feb 28 is a Friday, the dropped Feb 29 is a Saturday, Mar 1 a Sunday
        a = availability_series(AvailabilityProfile(0.5), 2020)
        assert a[58 * 24 + 12] == 0.5
        assert a[59 * 24 + 12] == 1.0
        assert a[60 * 24 + 12] == 0.5

    def test_bad_profile(self):
        with pytest.raises(ValidationError):
            AvailabilityProfile(1.2)
        with pytest.raises(ValidationError):
            AvailabilityProfile(0.3, away_start=18, away_end=8)


class TestFleetLimits:
    def test_absent_fleet(self):
        s = FleetState.initial(100, 40)
        assert fleet_limits(s, 0.0, 6.0) == (0.0, 0.0, 0.0, 0.0)

    def test_at_floor(self):
        s = FleetState(100, 40, soc=0.5 * 4000)
        max_c, max_d, head, reserve = fleet_limits(s, 1.0, 6.0)
        assert max_d == 0.0
        assert reserve == 0.0
        assert head == pytest.approx(1800.0)
        assert max_c == pytest.approx(600.0)

    def test_paris_power_cap(self):
        s = FleetState.initial(585e3, 40)
        max_c, max_d, _, _ = fleet_limits(s, 1.0, 6.0)
        assert max_c == pytest.approx(3.51e6)
        assert max_d == pytest.approx(3.51e6)

    def test_proportional_sharing(self):
        s = FleetState(10, 40, soc=0.8 * 400)
        _, _, head, reserve = fleet_limits(s, 0.4, 6.0)
        assert head == pytest.approx(0.4 * (0.95 - 0.8) * 400)
        assert reserve == pytest.approx(0.4 * (0.8 - 0.5) * 400)

    def test_energy_bounds_use_efficiency(self):
        s = FleetState(1000, 40, soc=0.94 * 40000)
        max_c, _, head, _ = fleet_limits(s, 1.0, 6.0, efficiency=0.9)
        assert max_c == pytest.approx(head / 0.9)

    def test_bad_availability(self):
        with pytest.raises(ValidationError):
            fleet_limits(FleetState.initial(1, 40), 1.5, 6.0)


class TestDegradation:
    def test_zero_discharge(self):
        s = FleetState.initial(10, 40)
        assert apply_degradation(s, 0.0) is s

    def test_linear_fade(self):
        s = FleetState.initial(10, 40)
        out = apply_degradation(s, 400.0 * 300)  # 300 FCE
        assert out.fade == pytest.approx(1 - 0.02)
        assert out.cumulative_discharge == 400.0 * 300
        assert out.replacements == ()

    def test_3000_fce_replaces(self):
        s = FleetState.initial(10, 40)
        out = apply_degradation(s, 400.0 * 3000, year=7)
        assert out.fade == 1.0
        assert out.replacements == (7,)

    def test_125_fce_per_year_replaces_in_year_24(self):
        s = FleetState.initial(10, 40)
        first = None
        for year in range(1, 26):
            s = apply_degradation(s, 125 * s.nameplate, year=year)
            if s.replacements and first is None:
                first = s.replacements[0]
        assert first == 24

    def test_soc_stays_in_window(self):
        s = FleetState(10, 40, soc=0.95 * 400)
        out = apply_degradation(s, 400.0 * 900)
        lo, hi = out.window
        assert lo - 1e-9 <= out.soc <= hi + 1e-9

    def test_negative(self):
        with pytest.raises(ValidationError):
            apply_degradation(FleetState.initial(1, 40), -1.0)
