from __future__ import annotations

import math

import numpy as np
import pytest

from solarev.core import HourlySeries, ValidationError
from solarev.ingest import scale_irradiance
from solarev.pv import (
    PvArrayConfig,
    calibrate_system_loss,
    capacity_factor,
    generation_series,
    monthly_yield,
    poa_irradiance,
    solar_angles,
    solar_position,
    specific_output,
    tilt_azimuth_scan,
)

from conftest import make_weather


def _declination_deg(doy):
    # Cooper's approximation, independent of the position routine
    return 23.44 * math.sin(math.radians(360.0 * (284 + doy) / 365.0))


# ---------------------------------------------------------------------------
# Solar position
# ---------------------------------------------------------------------------


class TestSolarPosition:
    def test_paris_june_noon(self):
        # June 21 = day 172; scan the day for the minimum zenith
        zen, _ = solar_angles(48.9, 2.4, 171 * 24 + np.arange(0, 24, 0.05), 2019, 1.0)
        expected = 48.9 - _declination_deg(172)
        assert zen.min() == pytest.approx(expected, abs=1.0)
        assert zen.min() == pytest.approx(25.5, abs=1.0)

    def test_midnight_below_horizon(self):
        for day in range(0, 365, 7):
            z, _ = solar_position(48.9, 2.4, day * 24, 2019, 1.0)
            assert z > 90.0

    def test_equator_equinox_noon(self):
        zen, _ = solar_angles(0.0, 0.0, 78 * 24 + np.arange(10, 14, 0.02), 2019, 0.0)
        assert zen.min() == pytest.approx(0.0, abs=1.0)

    def test_afternoon_sun_in_west(self):
        _, az = solar_position(48.9, 2.4, 171 * 24 + 17, 2019, 1.0)
        assert 200 < az < 320


# ---------------------------------------------------------------------------
# POA
# ---------------------------------------------------------------------------


class TestPoa:
    def test_night(self):
        assert poa_irradiance(0.0, 0.0, 0.0, 120.0, 0.0, 40, 180) == 0.0

    def test_horizontal_equals_ghi(self, paris):
        from solarev.pv import year_solar_angles

        z, a = year_solar_angles(paris.weather)
        w = paris.weather
        poa = poa_irradiance(w.ghi.values, w.dni.values, w.dhi.values, z, a, 0.0, 180.0)
        np.testing.assert_allclose(poa, w.ghi.values, rtol=0, atol=1e-9)

    def test_overhead_beam_projection(self):
        poa = poa_irradiance(1000.0, 1000.0, 0.0, 0.0, 180.0, 40.0, 180.0, albedo=0.0)
        assert poa == pytest.approx(1000 * math.cos(math.radians(40)), abs=1e-9)
        assert poa == pytest.approx(766.0, abs=0.1)

    def test_isotropic_diffuse_and_ground(self):
        # pure diffuse sky, vertical plane: half the sky dome plus half the ground
        poa = poa_irradiance(200.0, 0.0, 200.0, 60.0, 180.0, 90.0, 180.0, albedo=0.2)
        assert poa == pytest.approx(200 * 0.5 + 200 * 0.2 * 0.5, abs=1e-9)


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


class TestGeneration:
    def test_zero_irradiance(self):
        g = generation_series(make_weather(0.0), PvArrayConfig(capacity=5.0))
        assert g.total() == 0.0

    def test_zero_capacity(self, paris):
        assert generation_series(paris.weather, PvArrayConfig(capacity=0.0)).total() == 0.0

    def test_bounded_by_capacity(self, paris):
        g = generation_series(scale_irradiance(paris.weather, 1.5), PvArrayConfig(capacity=3.0, system_loss=0.0))
        assert g.values.min() >= 0.0
        assert g.values.max() <= 3.0

    def test_power_formula_single_hour(self):
        # horizontal panel: poa = ghi; hand formula with NOCT cell temperature
        w = make_weather(800.0, 0.0, 800.0, temp=20.0)
        arr = PvArrayConfig(capacity=1.0, tilt=0.0)
        t_cell = 20.0 + (45.0 - 20.0) / 800.0 * 800.0
        expected = 0.8 * (1 - 0.004 * (t_cell - 25)) * 0.86 * 0.96
        assert specific_output(w, arr)[0] == pytest.approx(expected, rel=1e-12)

    def test_homogeneous_in_capacity(self, paris):
        g1 = generation_series(paris.weather, PvArrayConfig(capacity=1.0))
        g2 = generation_series(paris.weather, PvArrayConfig(capacity=2.0))
        assert np.array_equal(g2.values, 2.0 * g1.values)

    def test_bundled_capacity_factor_at_defaults(self, paris):
        g = generation_series(scale_irradiance(paris.weather, 0.8), PvArrayConfig())
        assert capacity_factor(g, 1.0) == pytest.approx(0.111, abs=0.007)

    def test_array_validation(self):
        with pytest.raises(ValidationError):
            PvArrayConfig(tilt=95)
        with pytest.raises(ValidationError):
            PvArrayConfig(capacity=-1)


class TestCapacityFactor:
    def test_flat(self):
        assert capacity_factor(HourlySeries(np.full(8760, 0.5), "kWh"), 1.0) == 0.5

    def test_zero(self):
        assert capacity_factor(HourlySeries(np.zeros(8760), "kWh"), 2.0) == 0.0

    @pytest.mark.parametrize("cap", [0.0, -1.0])
    def test_bad_capacity(self, cap):
        with pytest.raises(ValidationError):
            capacity_factor(HourlySeries(np.zeros(8760), "kWh"), cap)


class TestCalibration:
    def test_hits_target(self, paris):
        w = scale_irradiance(paris.weather, 0.8)
        loss = calibrate_system_loss(w, PvArrayConfig(), 0.111)
        g = generation_series(w, PvArrayConfig(system_loss=loss))
        assert capacity_factor(g, 1.0) == pytest.approx(0.111, abs=1e-9)
        assert 0.0 < loss < 0.5

    def test_unreachable(self, paris):
        with pytest.raises(ValidationError, match="unreachable"):
            calibrate_system_loss(paris.weather, PvArrayConfig(), 0.5)


class TestScan:
    def test_flat_panel_has_no_azimuth(self, paris):
        t = tilt_azimuth_scan(paris.weather, [0], [90, 135, 180, 225, 270])
        assert np.ptp(t[0]) == 0.0

    def test_single_cell_matches_specific_yield(self, paris):
        t = tilt_azimuth_scan(paris.weather, [35], [170])
        direct = specific_output(paris.weather, PvArrayConfig(tilt=35, azimuth=170)).sum()
        assert t.shape == (1, 1)
        assert t[0, 0] == direct

    def test_paris_optimum_tilt(self, paris):
        tilts = list(range(0, 91, 5))
        t = tilt_azimuth_scan(scale_irradiance(paris.weather, 0.8), tilts, [180])
        assert 30 <= tilts[int(np.argmax(t[:, 0]))] <= 50

    def test_empty(self, paris):
        with pytest.raises(ValidationError):
            tilt_azimuth_scan(paris.weather, [], [180])


class TestMonthly:
    def test_constant(self):
        m = monthly_yield(HourlySeries(np.ones(8760), "kWh"))
        assert m[0] == 744
        assert m[1] == 672
        assert m.sum() == 8760

    def test_partition(self, paris):
        g = generation_series(paris.weather, PvArrayConfig())
        m = monthly_yield(g)
        assert m.sum() == pytest.approx(g.total(), rel=1e-9)

    def test_paris_december_below_june(self, paris):
        g = generation_series(paris.weather, PvArrayConfig()).values
        edges = np.cumsum([0, 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]) * 24
        june = sum(g[edges[5]:edges[6]])
        december = sum(g[edges[11]:edges[12]])
        m = monthly_yield(HourlySeries(g, "kWh"))
        assert m[5] == pytest.approx(june)
        assert m[11] == pytest.approx(december)
        assert december < june
