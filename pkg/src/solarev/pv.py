"""Solar geometry, plane-of-array transposition and hourly PV output."""
from __future__ import annotations

import calendar
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .core import HOURS_PER_YEAR, MONTH_DAYS, HourlySeries, ScenarioConfig, ValidationError
from .ingest import WeatherYear

# below this cosine of zenith the sun is treated as set for beam transposition
_MIN_COS_ZENITH = 1e-6
_MAX_BEAM_RATIO = 10.0


@dataclass(frozen=True)
class PvArrayConfig:
    capacity: float = 1.0  # kW DC
    tilt: float = 40.0
    azimuth: float = 180.0
    system_loss: float = 0.14
    temp_coefficient: float = -0.004
    noct: float = 45.0
    inverter_efficiency: float = 0.96
    albedo: float = 0.2

    def __post_init__(self):
        if self.capacity < 0:
            raise ValidationError("capacity must be >= 0")
        if not 0.0 <= self.tilt <= 90.0:
            raise ValidationError("tilt must be in [0, 90]")
        if not 0.0 <= self.azimuth < 360.0:
            raise ValidationError("azimuth must be in [0, 360)")
        if not 0.0 <= self.system_loss < 1.0:
            raise ValidationError("system_loss must be in [0, 1)")
        if not 0.0 < self.inverter_efficiency <= 1.0:
            raise ValidationError("inverter_efficiency must be in (0, 1]")


def array_from_config(config: ScenarioConfig, capacity: float = 1.0) -> PvArrayConfig:
    return PvArrayConfig(
        capacity=capacity,
        tilt=config.tilt,
        azimuth=config.azimuth,
        system_loss=config.system_loss,
        temp_coefficient=config.temp_coefficient,
        noct=config.noct,
        inverter_efficiency=config.inverter_efficiency,
        albedo=config.albedo,
    )


# ---------------------------------------------------------------------------
# Solar position
# ---------------------------------------------------------------------------


def solar_angles(latitude, longitude, local_hours, year=2019, utc_offset=0.0):
    """Zenith and azimuth (degrees, azimuth clockwise from north).

    ``local_hours`` counts hours from Jan 1 00:00 local standard time on the
    8760-hour grid (Feb 29 removed in leap years). Uses the NOAA Fourier-series
    declination and equation of time.
    """
    t = np.asarray(local_hours, dtype=float)
    day0 = np.floor(t / 24.0)
    hour_of_day = t - 24.0 * day0
    year_days = 365.0
    if calendar.isleap(year):
        year_days = 366.0
        day0 = np.where(day0 >= 59, day0 + 1, day0)
    g = 2.0 * np.pi / year_days * (day0 + (hour_of_day - 12.0) / 24.0)
    eqtime = 229.18 * (
        0.000075 + 0.001868 * np.cos(g) - 0.032077 * np.sin(g)
        - 0.014615 * np.cos(2 * g) - 0.040849 * np.sin(2 * g)
    )
    decl = (
        0.006918 - 0.399912 * np.cos(g) + 0.070257 * np.sin(g)
        - 0.006758 * np.cos(2 * g) + 0.000907 * np.sin(2 * g)
        - 0.002697 * np.cos(3 * g) + 0.00148 * np.sin(3 * g)
    )
    true_solar_min = hour_of_day * 60.0 + eqtime + 4.0 * longitude - 60.0 * utc_offset
    hour_angle = np.radians(true_solar_min / 4.0 - 180.0)
    lat = np.radians(latitude)
    cos_z = np.sin(lat) * np.sin(decl) + np.cos(lat) * np.cos(decl) * np.cos(hour_angle)
    zenith = np.degrees(np.arccos(np.clip(cos_z, -1.0, 1.0)))
    az = np.degrees(
        np.arctan2(np.sin(hour_angle), np.cos(hour_angle) * np.sin(lat) - np.tan(decl) * np.cos(lat))
    )
    azimuth = np.mod(az + 180.0, 360.0)
    return zenith, azimuth


def solar_position(latitude, longitude, hour_index, year=2019, utc_offset=0.0):
    """Sun angles at the midpoint of ``hour_index`` (local standard time)."""
    if not 0 <= hour_index < HOURS_PER_YEAR:
        raise ValidationError(f"hour_index {hour_index} outside [0, {HOURS_PER_YEAR})")
    z, a = solar_angles(latitude, longitude, hour_index + 0.5, year, utc_offset)
    return float(z), float(a)


def year_solar_angles(weather: WeatherYear):
    hours = np.arange(HOURS_PER_YEAR) + 0.5
    return solar_angles(weather.latitude, weather.longitude, hours, weather.start_year, weather.utc_offset)


# ---------------------------------------------------------------------------
# Transposition and generation
# ---------------------------------------------------------------------------


def poa_components(ghi, dni, dhi, zenith, sun_azimuth, tilt, azimuth, albedo=0.2):
    """Beam, sky-diffuse and ground-reflected POA irradiance (W/m2).

    Isotropic sky. The horizontal beam is taken as GHI - DHI (DNI * cos(zenith)
    under closure), which makes a horizontal plane see exactly GHI. ``dni`` is
    kept in the signature for callers holding a full weather record.
    """
    ghi = np.asarray(ghi, dtype=float)
    dhi_eff = np.minimum(np.asarray(dhi, dtype=float), ghi)
    beam_h = ghi - dhi_eff
    beta = np.radians(tilt)
    zen = np.radians(zenith)
    cos_z = np.cos(zen)
    if tilt == 0:
        ratio = np.ones_like(cos_z)
    else:
        cos_inc = cos_z * np.cos(beta) + np.sin(zen) * np.sin(beta) * np.cos(
            np.radians(np.asarray(sun_azimuth, dtype=float) - azimuth)
        )
        safe = np.where(cos_z > _MIN_COS_ZENITH, cos_z, 1.0)
        ratio = np.where(cos_z > _MIN_COS_ZENITH, np.maximum(cos_inc, 0.0) / safe, 0.0)
        ratio = np.minimum(ratio, _MAX_BEAM_RATIO)
    beam = beam_h * ratio
    sky = dhi_eff * (1.0 + np.cos(beta)) / 2.0
    ground = ghi * albedo * (1.0 - np.cos(beta)) / 2.0
    return beam, sky, ground


def poa_irradiance(ghi, dni, dhi, zenith, sun_azimuth, tilt, azimuth, albedo=0.2):
    beam, sky, ground = poa_components(ghi, dni, dhi, zenith, sun_azimuth, tilt, azimuth, albedo)
    return np.maximum(beam + sky + ground, 0.0)


def specific_output(weather: WeatherYear, array: PvArrayConfig, angles=None) -> np.ndarray:
    """Hourly AC output per kW DC (kWh/kW), clipped to [0, 1]."""
    zenith, sun_az = angles if angles is not None else year_solar_angles(weather)
    poa = poa_irradiance(
        weather.ghi.values, weather.dni.values, weather.dhi.values,
        zenith, sun_az, array.tilt, array.azimuth, array.albedo,
    )
    t_cell = weather.temperature.values + (array.noct - 20.0) / 800.0 * poa
    dc = poa / 1000.0 * (1.0 + array.temp_coefficient * (t_cell - 25.0))
    ac = dc * (1.0 - array.system_loss) * array.inverter_efficiency
    return np.clip(ac, 0.0, 1.0)


def generation_series(weather: WeatherYear, array: PvArrayConfig, angles=None) -> HourlySeries:
    """Hourly AC energy in kWh; exactly homogeneous in ``array.capacity``."""
    unit = specific_output(weather, array, angles)
    return HourlySeries(array.capacity * unit, "kWh", weather.start_year)


def capacity_factor(gen: HourlySeries, capacity: float) -> float:
    if not capacity > 0:
        raise ValidationError(f"capacity must be > 0, got {capacity!r}")
    return float(np.sum(gen.values)) / (capacity * len(gen))


def calibrate_system_loss(weather: WeatherYear, array: PvArrayConfig, target_cf: float = 0.111) -> float:
    """Fit the single ``system_loss`` scalar so the capacity factor hits ``target_cf``."""
    angles = year_solar_angles(weather)

    def gap(loss):
        unit = specific_output(weather, replace(array, system_loss=loss, capacity=1.0), angles)
        return unit.mean() - target_cf

    lo, hi = 0.0, 0.99
    if gap(lo) < 0:
        raise ValidationError(
            f"target capacity factor {target_cf} unreachable: lossless CF is {gap(lo) + target_cf:.4f}"
        )
    if gap(hi) > 0:
        raise ValidationError(f"target capacity factor {target_cf} unreachable even at 99% loss")
    return float(brentq(gap, lo, hi, xtol=1e-12))


def tilt_azimuth_scan(weather: WeatherYear, tilts, azimuths, array: PvArrayConfig | None = None) -> np.ndarray:
    """Annual specific yield (kWh/kW) for every (tilt, azimuth) pair.

    Rows follow ``tilts``, columns ``azimuths``.
    """
    tilts = list(tilts)
    azimuths = list(azimuths)
    if not tilts or not azimuths:
        raise ValidationError("tilt and azimuth grids must be non-empty")
    base = array or PvArrayConfig()
    angles = year_solar_angles(weather)
    table = np.empty((len(tilts), len(azimuths)))
    for i, tilt in enumerate(tilts):
        for j, az in enumerate(azimuths):
            arr = replace(base, capacity=1.0, tilt=float(tilt), azimuth=float(az) % 360.0)
            table[i, j] = specific_output(weather, arr, angles).sum()
    return table


def monthly_yield(gen: HourlySeries) -> np.ndarray:
    """Calendar-month energy sums (non-leap month lengths)."""
    if len(gen) != HOURS_PER_YEAR:
        raise ValidationError(f"expected {HOURS_PER_YEAR} hourly values, got {len(gen)}")
    edges = np.concatenate([[0], np.cumsum(MONTH_DAYS) * 24])
    return np.add.reduceat(gen.values, edges[:-1])
