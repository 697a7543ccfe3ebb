"""Seeded synthetic weather and demand years, and the bundled-data loaders.

The bundled CSVs under ``solarev/data`` were produced by
``scripts/make_synthetic_data.py`` from the generators here. They stand in
for reanalysis weather and grid-operator demand so every test runs offline; they are not observations.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import HOURS_PER_YEAR, HourlySeries, region_preset
from .ingest import Site, WeatherYear, derive_scaled_demand, load_demand, load_weather
from .pv import solar_angles
from .sweep import RegionData

PARIS_DEMAND_FACTOR = 0.18


@dataclass(frozen=True)
class ClimateParams:
    clearness_mean: float  # mean fraction of clear-sky GHI
    clearness_amp: float  # summer-winter swing of that fraction
    clearness_sd: float
    temp_mean: float
    temp_season_amp: float
    temp_day_amp: float
    wind_mean: float


# clearness tuned so that the 0.8-scaled Paris year gives CF ~ 11.1% at 40/180
CLIMATES = {
    "Paris": ClimateParams(0.75, 0.12, 0.22, 12.5, 7.5, 4.0, 3.6),
    "Kyoto": ClimateParams(0.90, 0.04, 0.20, 16.0, 10.5, 4.5, 2.2),
}


def _doy(hours: np.ndarray) -> np.ndarray:
    return hours // 24 + 1


def _ar1(rng: np.random.Generator, n: int, rho: float, sd: float) -> np.ndarray:
    eps = rng.normal(0.0, sd * np.sqrt(1 - rho**2), n)
    out = np.empty(n)
    out[0] = rng.normal(0.0, sd)
    for i in range(1, n):
        out[i] = rho * out[i - 1] + eps[i]
    return out


def _erbs_diffuse_fraction(kt: np.ndarray) -> np.ndarray:
    mid = 0.9511 - 0.1604 * kt + 4.388 * kt**2 - 16.638 * kt**3 + 12.336 * kt**4
    return np.where(kt <= 0.22, 1.0 - 0.09 * kt, np.where(kt <= 0.8, mid, 0.165))


def synthetic_weather(site: Site, climate: ClimateParams, year: int = 2019, seed: int = 0) -> WeatherYear:
    """Clear-sky (Haurwitz) irradiance with seeded daily cloudiness, Erbs
    diffuse split and sinusoidal temperature."""
    rng = np.random.default_rng(seed)
    hours = np.arange(HOURS_PER_YEAR)
    doy = _doy(hours)
    zenith, _ = solar_angles(site.latitude, site.longitude, hours + 0.5, year, site.utc_offset)
    cos_z = np.cos(np.radians(zenith))
    up = cos_z > 0.0
    safe = np.where(up, cos_z, 1.0)
    ghi_clear = np.where(up, 1098.0 * cos_z * np.exp(-0.057 / safe), 0.0)

    season = -np.cos(2 * np.pi * (np.arange(365) + 1 - 15) / 365.0)  # -1 winter, +1 summer
    daily = climate.clearness_mean + climate.clearness_amp * season + _ar1(rng, 365, 0.5, climate.clearness_sd)
    daily = np.clip(daily, 0.08, 1.0)
    hourly = np.clip(1.0 + rng.normal(0.0, 0.08, HOURS_PER_YEAR), 0.6, 1.15)
    ghi = ghi_clear * daily[doy - 1] * hourly

    extra = 1367.0 * (1 + 0.033 * np.cos(2 * np.pi * doy / 365.0)) * safe
    kt = np.where(up, np.clip(ghi / extra, 0.0, 1.0), 0.0)
    dhi = ghi * _erbs_diffuse_fraction(kt)
    low = cos_z <= 0.0872
    dhi = np.where(low, ghi, dhi)
    dni = np.where(low, 0.0, (ghi - dhi) / safe)

    temp = (
        climate.temp_mean
        - climate.temp_season_amp * np.cos(2 * np.pi * (doy - 20) / 365.0)
        + climate.temp_day_amp * np.cos(2 * np.pi * ((hours % 24) - 15) / 24.0)
        + np.repeat(_ar1(rng, 365, 0.7, 2.5), 24)
    )
    wind = np.clip(climate.wind_mean + _ar1(rng, HOURS_PER_YEAR, 0.9, 1.2), 0.0, None)
    mk = lambda v, u: HourlySeries(np.round(v, 3), u, year)  # noqa: E731
    return WeatherYear(mk(ghi, "W/m2"), mk(dni, "W/m2"), mk(dhi, "W/m2"), mk(temp, "degC"), mk(wind, "m/s"),
                       site.latitude, site.longitude, site.utc_offset)


def _bump(h, centre, width):
    return np.exp(-((h - centre) ** 2) / (2 * width**2))


def synthetic_demand(weather: WeatherYear, annual_kwh: float, style: str = "paris", seed: int = 1) -> HourlySeries:
    """Hourly demand (kWh) tied to the weather year's temperature.

    ``paris``: heating-driven winter peak, noon and 19:00 peaks.
    ``kyoto``: cooling-driven summer afternoon peak, lunch-break dip.
    """
    rng = np.random.default_rng(seed)
    hours = np.arange(HOURS_PER_YEAR)
    hod = hours % 24
    t_day = weather.temperature.values.reshape(365, 24).mean(axis=1).repeat(24)
    weekday = ((hours // 24 + 1) % 7) < 5  # 2019-01-01 is a Tuesday
    if style == "paris":
        shape = 0.80 + 0.14 * _bump(hod, 12.5, 2.0) + 0.20 * _bump(hod, 19.0, 1.8) - 0.16 * _bump(hod, 4.0, 2.5)
        weather_term = 0.035 * np.maximum(15.0 - t_day, 0.0) + 0.01 * np.maximum(t_day - 22.0, 0.0)
        week = np.where(weekday, 1.0, 0.9)
    elif style == "kyoto":
        shape = (0.78 + 0.16 * _bump(hod, 9.0, 1.5) + 0.22 * _bump(hod, 15.0, 2.5)
                 + 0.14 * _bump(hod, 19.0, 1.5) - 0.08 * _bump(hod, 12.5, 0.5) - 0.14 * _bump(hod, 4.0, 2.5))
        weather_term = 0.012 * np.maximum(14.0 - t_day, 0.0) + 0.05 * np.maximum(t_day - 22.0, 0.0)
        week = np.where(weekday, 1.0, 0.88)
    else:
        raise ValueError(f"unknown demand style {style!r}")
    noise = 1.0 + rng.normal(0.0, 0.015, HOURS_PER_YEAR)
    raw = shape * week * (1.0 + weather_term) * noise
    return HourlySeries(raw * annual_kwh / raw.sum(), "kWh", weather.start_year)


# ---------------------------------------------------------------------------
# Bundled files
# ---------------------------------------------------------------------------

WEATHER_FILES = {"Paris": "weather_paris_synthetic.csv", "Kyoto": "weather_kyoto_synthetic.csv"}
DEMAND_FILES = {"IleDeFrance": "demand_idf_synthetic.csv", "Kyoto": "demand_kyoto_synthetic.csv"}


def data_path(filename: str):
    return resources.files("solarev") / "data" / filename


def bundled_weather(region: str = "Paris") -> WeatherYear:
    profile = region_preset(region)
    key = "Kyoto" if profile.name == "Kyoto" else "Paris"
    site = Site(profile.latitude, profile.longitude, profile.utc_offset)
    with resources.as_file(data_path(WEATHER_FILES[key])) as path:
        return load_weather(path, site)


def bundled_demand(region: str = "IleDeFrance") -> HourlySeries:
    """Base (pre-EV) demand; Paris is 0.18 x the Ile-de-France year."""
    profile = region_preset(region)
    key = "Kyoto" if profile.name == "Kyoto" else "IleDeFrance"
    with resources.as_file(data_path(DEMAND_FILES[key])) as path:
        series = load_demand(path)
    if profile.name == "Paris":
        series = derive_scaled_demand(series, PARIS_DEMAND_FACTOR)
    return series


def bundled_region(name: str) -> RegionData:
    profile = region_preset(name)
    return RegionData(profile, bundled_weather(profile.name), bundled_demand(profile.name))
