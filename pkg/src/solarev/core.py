"""Domain types, region presets and scenario configuration."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np

HOURS_PER_YEAR = 8760
LEAP_HOURS = 8784
MONTH_DAYS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


class ValidationError(ValueError):
    """Raised when an input violates a documented constraint."""


class ConfigError(ValidationError):
    """Raised for malformed scenario configuration documents."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class SeriesError(ValidationError):
    """Raised when an hourly series fails validation."""


# ---------------------------------------------------------------------------
# Hourly series
# ---------------------------------------------------------------------------

_UNIT_ALIASES = {
    "kwh": "kWh",
    "w/m2": "W/m2",
    "w/m²": "W/m2",
    "degc": "degC",
    "°c": "degC",
    "c": "degC",
    "m/s": "m/s",
    "1": "1",
    "dimensionless": "1",
}
NON_NEGATIVE_UNITS = frozenset({"kWh", "W/m2"})


def normalize_unit(unit: str) -> str:
    try:
        return _UNIT_ALIASES[unit.strip().lower()]
    except KeyError:
        raise SeriesError(f"unknown unit {unit!r}") from None


@dataclass(frozen=True, eq=False)
class HourlySeries:
    """One calendar year of hourly values with a unit tag.

    The value array is copied and made read-only on construction. Construction
    does not validate; call :func:`validate_series` for that.
    """

    values: np.ndarray
    unit: str
    start_year: int = 2019

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True).ravel()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "unit", normalize_unit(self.unit))

    def __len__(self) -> int:
        return self.values.size

    def total(self) -> float:
        return float(self.values.sum())

    def with_values(self, values) -> "HourlySeries":
        return HourlySeries(values, self.unit, self.start_year)

    def equals(self, other: "HourlySeries") -> bool:
        return (
            self.unit == other.unit
            and self.start_year == other.start_year
            and np.array_equal(self.values, other.values)
        )


def validate_series(s: HourlySeries) -> HourlySeries:
    """Return ``s`` unchanged if it is a complete, finite, non-leap year."""
    n = len(s)
    if n != HOURS_PER_YEAR:
        raise SeriesError(f"expected {HOURS_PER_YEAR} hourly values, got {n}")
    bad = np.flatnonzero(~np.isfinite(s.values))
    if bad.size:
        raise SeriesError(f"non-finite value at index {int(bad[0])}")
    if s.unit in NON_NEGATIVE_UNITS:
        neg = np.flatnonzero(s.values < 0)
        if neg.size:
            raise SeriesError(
                f"negative value {s.values[neg[0]]!r} at index {int(neg[0])} for unit {s.unit}"
            )
    return s


# ---------------------------------------------------------------------------
# Region presets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionProfile:
    name: str
    population: float
    roof_area: float  # m2
    demand_per_capita: float  # kWh/yr
    n_vehicles: float
    n_gasoline: float
    n_diesel: float
    weekday_use_fraction: float
    avg_km_per_car_day: float
    grid_emission_factor: float  # kg CO2/kWh
    retail_tariff: float  # EUR/kWh
    fit_rate: float  # EUR/kWh
    latitude: float
    longitude: float
    utc_offset: float = 0.0  # hours, local standard time

    def __post_init__(self):
        if not self.roof_area > 0:
            raise ValidationError(f"{self.name}: roof_area must be > 0")
        if self.population <= 0:
            raise ValidationError(f"{self.name}: population must be > 0")
        if min(self.n_vehicles, self.n_gasoline, self.n_diesel) < 0:
            raise ValidationError(f"{self.name}: vehicle counts must be >= 0")
        if self.n_gasoline + self.n_diesel > self.n_vehicles:
            raise ValidationError(f"{self.name}: n_gasoline + n_diesel exceeds n_vehicles")
        if not 0.0 <= self.weekday_use_fraction <= 1.0:
            raise ValidationError(f"{self.name}: weekday_use_fraction must be in [0, 1]")
        if self.grid_emission_factor < 0:
            raise ValidationError(f"{self.name}: grid_emission_factor must be >= 0")

    @property
    def annual_demand(self) -> float:
        """Annual electricity demand in kWh (population x per-capita use)."""
        return self.population * self.demand_per_capita

    @property
    def vehicles_per_capita(self) -> float:
        return self.n_vehicles / self.population

    @property
    def roof_area_per_capita(self) -> float:
        return self.roof_area / self.population


_PRESETS = MappingProxyType(
    {
        "Paris": RegionProfile(
            name="Paris",
            population=2.18e6,
            roof_area=31e6,
            demand_per_capita=6031.0,
            n_vehicles=585e3,
            n_gasoline=334e3,
            n_diesel=250e3,
            weekday_use_fraction=0.35,
            avg_km_per_car_day=21.8,
            grid_emission_factor=0.063,
            retail_tariff=0.16,
            fit_rate=0.04,
            latitude=48.9,
            longitude=2.4,
            utc_offset=1.0,
        ),
        "IleDeFrance": RegionProfile(
            name="IleDeFrance",
            population=12.2e6,
            roof_area=402e6,
            demand_per_capita=6277.0,
            n_vehicles=5327e3,
            n_gasoline=2525e3,
            n_diesel=2802e3,
            weekday_use_fraction=0.63,
            avg_km_per_car_day=26.3,
            grid_emission_factor=0.063,
            retail_tariff=0.16,
            fit_rate=0.04,
            latitude=49.0,
            longitude=2.5,
            utc_offset=1.0,
        ),
        "Kyoto": RegionProfile(
            name="Kyoto",
            population=1.47e6,
            roof_area=52e6,
            demand_per_capita=5678.0,
            n_vehicles=485e3,
            n_gasoline=0.0,
            n_diesel=0.0,
            weekday_use_fraction=0.35,
            avg_km_per_car_day=8.0,
            grid_emission_factor=0.352,
            retail_tariff=0.16,
            fit_rate=0.04,
            latitude=35.0,
            longitude=135.8,
            utc_offset=9.0,
        ),
    }
)
PRESET_NAMES = tuple(_PRESETS)


def region_preset(name: str) -> RegionProfile:
    """Return the embedded profile for ``Paris``, ``IleDeFrance`` or ``Kyoto``."""
    key = {k.lower(): k for k in _PRESETS}.get(name.replace("-", "").replace("_", "").lower())
    if key is None:
        raise ValidationError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")
    return _PRESETS[key]


def profile_to_dict(profile: RegionProfile) -> dict[str, Any]:
    out = dataclasses.asdict(profile)
    out["annual_demand"] = profile.annual_demand
    return out


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------


class System(str, Enum):
    PV_ONLY = "PVOnly"
    PV_EV = "PVEV"


class DemandMode(str, Enum):
    FIXED_FACTOR = "fixed_factor"
    PER_REGION_UPLIFT = "per_region_uplift"


PV_CAPEX = {2019: 1.9, 2030: 1.31}  # EUR/W, installation and inverter included
MAX_COVERAGE = 5.0 / 7.0
PANEL_AREA_PER_KW = 5.0  # m2/kW


@dataclass(frozen=True)
class FuelAssumptions:
    gasoline_l_per_100km: float = 6.5
    diesel_l_per_100km: float = 5.5
    gasoline_kg_co2_per_l: float = 2.31
    diesel_kg_co2_per_l: float = 2.68
    gasoline_eur_per_l: float = 1.55
    diesel_eur_per_l: float = 1.45


@dataclass(frozen=True)
class ScenarioConfig:
    """All knobs of one scenario run. Build through :func:`build_scenario`."""

    system: System = System.PV_EV
    period: int = 2030
    fit_enabled: bool = True
    coverage: float = 0.71
    max_coverage: float = MAX_COVERAGE
    panel_area_per_kw: float = PANEL_AREA_PER_KW
    pv_capex: float = 1.31  # EUR/W
    om_cost: float = 22.5  # EUR/kW/yr
    v2h_capex: float | None = 25.0  # EUR/kWh of fleet battery
    battery_per_vehicle: float = 40.0  # kWh
    charger_power: float = 6.0  # kW per vehicle
    soc_min: float = 0.50
    soc_max: float = 0.95
    roundtrip_split_efficiency: float = 0.95
    discount_rate: float = 0.025
    horizon: int = 25
    pv_degradation: float = 0.005
    battery_fade_per_fce: float = 0.2 / 3000.0
    battery_replacement_cost: float = 91.0  # EUR per battery
    irradiance_scale: float = 0.8
    tilt: float = 40.0
    azimuth: float = 180.0
    system_loss: float = 0.14
    inverter_efficiency: float = 0.96
    temp_coefficient: float = -0.004
    noct: float = 45.0
    albedo: float = 0.2
    ev_efficiency: float = 17.2  # kWh/100km
    retail_tariff: float = 0.16
    fit_rate: float = 0.04
    price_escalation: float = 0.0
    demand_mode: DemandMode = DemandMode.PER_REGION_UPLIFT
    demand_factor: float = 1.08
    away_start_hour: int = 8
    away_end_hour: int = 18
    weekend_fraction_away: float = 0.0
    export_cap: float | None = None  # kWh/h; None = unlimited export
    fuel: FuelAssumptions = field(default_factory=FuelAssumptions)

    @property
    def has_fleet(self) -> bool:
        return self.system is System.PV_EV

    @property
    def currency_label(self) -> str:
        return f"EUR{self.period}"


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
_FUEL_FIELDS = {f.name for f in dataclasses.fields(FuelAssumptions)}
_INT_FIELDS = {"period", "horizon", "away_start_hour", "away_end_hour"}


def _bound(name: str, value: float, lo: float | None, hi: float | None, *, lo_open=False, hi_open=False):
    if lo is not None and (value <= lo if lo_open else value < lo):
        op = ">" if lo_open else ">="
        raise ConfigError(f"{name} = {value!r} violates {name} {op} {lo}", name)
    if hi is not None and (value >= hi if hi_open else value > hi):
        op = "<" if hi_open else "<="
        raise ConfigError(f"{name} = {value!r} violates {name} {op} {hi}", name)


def _as_number(name: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}", name)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}", name)
    return float(value)


def build_scenario(raw: Mapping[str, Any], region: RegionProfile | None = None) -> ScenarioConfig:
    """Build a validated :class:`ScenarioConfig` from a key-value document.

    Unspecified keys take the built-in defaults for the chosen system and period.
    When ``region`` is given, unspecified ``retail_tariff``/``fit_rate`` come
    from that profile instead.
    """
    raw = dict(raw)
    for key in raw:
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", key)

    try:
        system = System(raw.get("system", System.PV_EV.value))
    except ValueError:
        raise ConfigError(f"system must be one of PVOnly, PVEV; got {raw.get('system')!r}", "system") from None
    period = raw.get("period", 2030)
    if period not in PV_CAPEX or isinstance(period, bool):
        raise ConfigError(f"period must be 2019 or 2030; got {period!r}", "period")

    if system is System.PV_ONLY and raw.get("v2h_capex") is not None:
        raise ConfigError("v2h_capex is only meaningful for system PVEV", "v2h_capex")

    values: dict[str, Any] = {"system": system, "period": int(period)}
    values["pv_capex"] = PV_CAPEX[int(period)]
    values["v2h_capex"] = 25.0 if system is System.PV_EV else None
    if region is not None:
        values["retail_tariff"] = region.retail_tariff
        values["fit_rate"] = region.fit_rate

    for key, value in raw.items():
        if key in ("system", "period"):
            continue
        if key == "fuel":
            values["fuel"] = _build_fuel(value)
        elif key == "fit_enabled":
            if not isinstance(value, bool):
                raise ConfigError(f"fit_enabled must be a boolean, got {value!r}", key)
            values[key] = value
        elif key == "demand_mode":
            try:
                values[key] = DemandMode(value)
            except ValueError:
                raise ConfigError(
                    f"demand_mode must be fixed_factor or per_region_uplift; got {value!r}", key
                ) from None
        elif key in ("export_cap", "v2h_capex") and value is None:
            values[key] = None
        elif key in _INT_FIELDS:
            num = _as_number(key, value)
            if num != int(num):
                raise ConfigError(f"{key} must be an integer, got {value!r}", key)
            values[key] = int(num)
        else:
            values[key] = _as_number(key, value)

    config = ScenarioConfig(**values)
    _validate(config)
    return config


def _build_fuel(raw: Any) -> FuelAssumptions:
    if isinstance(raw, FuelAssumptions):
        return raw
    if not isinstance(raw, Mapping):
        raise ConfigError("fuel must be a table of fuel assumptions", "fuel")
    kwargs = {}
    for key, value in raw.items():
        if key not in _FUEL_FIELDS:
            raise ConfigError(f"unknown key 'fuel.{key}'", f"fuel.{key}")
        num = _as_number(f"fuel.{key}", value)
        _bound(f"fuel.{key}", num, 0.0, None)
        kwargs[key] = num
    return FuelAssumptions(**kwargs)


def _validate(c: ScenarioConfig) -> None:
    _bound("max_coverage", c.max_coverage, 0.0, 1.0, lo_open=True)
    _bound("coverage", c.coverage, 0.0, c.max_coverage)
    _bound("panel_area_per_kw", c.panel_area_per_kw, 0.0, None, lo_open=True)
    for name in ("pv_capex", "om_cost", "battery_per_vehicle", "charger_power",
                 "battery_replacement_cost", "retail_tariff", "fit_rate", "battery_fade_per_fce"):
        _bound(name, getattr(c, name), 0.0, None)
    if c.v2h_capex is not None:
        _bound("v2h_capex", c.v2h_capex, 0.0, None)
    if not 0.0 <= c.soc_min < c.soc_max <= 1.0:
        raise ConfigError(
            f"soc_min < soc_max violated (soc_min={c.soc_min}, soc_max={c.soc_max}, both in [0, 1])",
            "soc_min",
        )
    _bound("roundtrip_split_efficiency", c.roundtrip_split_efficiency, 0.0, 1.0, lo_open=True)
    _bound("discount_rate", c.discount_rate, -1.0, None, lo_open=True)
    _bound("horizon", c.horizon, 1, 100)
    _bound("pv_degradation", c.pv_degradation, 0.0, 1.0, hi_open=True)
    _bound("irradiance_scale", c.irradiance_scale, 0.0, 1.5, lo_open=True)
    _bound("tilt", c.tilt, 0.0, 90.0)
    _bound("azimuth", c.azimuth, 0.0, 360.0, hi_open=True)
    _bound("system_loss", c.system_loss, 0.0, 1.0, hi_open=True)
    _bound("inverter_efficiency", c.inverter_efficiency, 0.0, 1.0, lo_open=True)
    _bound("temp_coefficient", c.temp_coefficient, -0.1, 0.1)
    _bound("noct", c.noct, 20.0, 100.0)
    _bound("albedo", c.albedo, 0.0, 1.0)
    _bound("ev_efficiency", c.ev_efficiency, 0.0, None, lo_open=True)
    _bound("price_escalation", c.price_escalation, -1.0, None, lo_open=True)
    _bound("demand_factor", c.demand_factor, 0.0, None, lo_open=True)
    _bound("weekend_fraction_away", c.weekend_fraction_away, 0.0, 1.0)
    if not 0 <= c.away_start_hour < c.away_end_hour <= 24:
        raise ConfigError(
            f"away window [{c.away_start_hour}, {c.away_end_hour}) violates 0 <= start < end <= 24",
            "away_start_hour",
        )
    if c.export_cap is not None:
        _bound("export_cap", c.export_cap, 0.0, None)


def config_to_dict(config: ScenarioConfig) -> dict[str, Any]:
    """Serialize to a plain document that :func:`build_scenario` accepts.

    ``None`` values are omitted so the result is TOML-representable.
    """
    out: dict[str, Any] = {}
    for name in _FIELDS:
        value = getattr(config, name)
        if value is None:
            continue
        if isinstance(value, Enum):
            value = value.value
        elif isinstance(value, FuelAssumptions):
            value = dataclasses.asdict(value)
        out[name] = value
    return out
