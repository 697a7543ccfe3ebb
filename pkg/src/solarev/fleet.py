"""EV-fleet demand uplift and the aggregated fleet battery pool."""
from __future__ import annotations

import calendar
import datetime as dt
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .core import (
    HOURS_PER_YEAR,
    DemandMode,
    HourlySeries,
    RegionProfile,
    ScenarioConfig,
    System,
    ValidationError,
)

REPLACEMENT_THRESHOLD = 0.8
_FADE_TOL = 1e-9


def ev_annual_energy(profile: RegionProfile, efficiency: float) -> float:
    """Annual EV charging energy (kWh) if the whole fleet were electric."""
    if not efficiency > 0:
        raise ValidationError(f"EV efficiency must be > 0, got {efficiency!r}")
    return (
        profile.n_vehicles
        * profile.weekday_use_fraction
        * profile.avg_km_per_car_day
        * 365.0
        * efficiency
        / 100.0
    )


def build_scenario_demand(
    base: HourlySeries,
    config: ScenarioConfig,
    profile: RegionProfile,
    mode: DemandMode | str | None = None,
) -> HourlySeries:
    """Scenario load: the base year, uplifted by EV charging for PV+EV runs."""
    try:
        mode = DemandMode(mode if mode is not None else config.demand_mode)
    except ValueError:
        raise ValidationError(f"unknown demand mode {mode!r}") from None
    if config.system is System.PV_ONLY:
        return base
    if mode is DemandMode.FIXED_FACTOR:
        factor = config.demand_factor
    else:
        factor = 1.0 + ev_annual_energy(profile, config.ev_efficiency) / base.total()
    return base.with_values(base.values * factor)


# ---------------------------------------------------------------------------
# Availability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AvailabilityProfile:
    weekday_use_fraction: float
    away_start: int = 8
    away_end: int = 18
    weekend_fraction_away: float = 0.0

    def __post_init__(self):
        for name in ("weekday_use_fraction", "weekend_fraction_away"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1]")
        if not 0 <= self.away_start < self.away_end <= 24:
            raise ValidationError("away window must satisfy 0 <= start < end <= 24")

    @classmethod
    def for_scenario(cls, profile: RegionProfile, config: ScenarioConfig) -> "AvailabilityProfile":
        return cls(
            profile.weekday_use_fraction,
            config.away_start_hour,
            config.away_end_hour,
            config.weekend_fraction_away,
        )


def _weekday_of_day(day_index: np.ndarray, year: int) -> np.ndarray:
    """Mon=0 weekday for day indices on the 365-day grid (Feb 29 removed)."""
    real = np.where((day_index >= 59) & calendar.isleap(year), day_index + 1, day_index)
    return (dt.date(year, 1, 1).weekday() + real) % 7


def availability_series(profile: AvailabilityProfile, start_year: int = 2019, n_hours: int = HOURS_PER_YEAR) -> np.ndarray:
    hours = np.arange(n_hours)
    weekday = _weekday_of_day(hours // 24, start_year) < 5
    hod = hours % 24
    away = weekday & (hod >= profile.away_start) & (hod < profile.away_end)
    return np.where(away, 1.0 - profile.weekday_use_fraction, 1.0 - profile.weekend_fraction_away)


def availability(hour_index: int, profile: AvailabilityProfile, start_year: int = 2019) -> float:
    """Fraction of the fleet plugged in during ``hour_index`` (local time)."""
    if not 0 <= hour_index < HOURS_PER_YEAR:
        raise ValidationError(f"hour_index {hour_index} outside [0, {HOURS_PER_YEAR})")
    weekday = _weekday_of_day(np.array(hour_index // 24), start_year) < 5
    hod = hour_index % 24
    if weekday and profile.away_start <= hod < profile.away_end:
        return 1.0 - profile.weekday_use_fraction
    return 1.0 - profile.weekend_fraction_away


# ---------------------------------------------------------------------------
# Fleet pool
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FleetState:
    """Aggregated fleet battery; ``soc`` is the pool energy in kWh."""

    n_vehicles: float
    capacity_per_vehicle: float
    soc: float
    fade: float = 1.0
    soc_min: float = 0.50
    soc_max: float = 0.95
    cumulative_discharge: float = 0.0
    replacements: tuple = ()

    @property
    def nameplate(self) -> float:
        return self.n_vehicles * self.capacity_per_vehicle

    @property
    def usable(self) -> float:
        return self.fade * self.nameplate

    @property
    def window(self) -> tuple[float, float]:
        return self.soc_min * self.usable, self.soc_max * self.usable

    @property
    def soc_fraction(self) -> float:
        return self.soc / self.usable if self.usable > 0 else 0.0

    @classmethod
    def initial(cls, n_vehicles, capacity_per_vehicle, soc_min=0.50, soc_max=0.95) -> "FleetState":
        """Fresh fleet with the pool at the midpoint of its SOC window."""
        nameplate = n_vehicles * capacity_per_vehicle
        return cls(n_vehicles, capacity_per_vehicle, 0.5 * (soc_min + soc_max) * nameplate,
                   soc_min=soc_min, soc_max=soc_max)

    @classmethod
    def for_scenario(cls, profile: RegionProfile, config: ScenarioConfig) -> "FleetState":
        return cls.initial(profile.n_vehicles, config.battery_per_vehicle, config.soc_min, config.soc_max)


def fleet_limits(state: FleetState, availability: float, charger_power: float, efficiency: float = 0.95):
    """(max_charge, max_discharge, headroom, reserve) in kWh for one hour.

    Power bound is ``availability * n * charger_power``; energy bounds come
    from the present share of the pool's SOC window.
    """
    if not 0.0 <= availability <= 1.0:
        raise ValidationError(f"availability {availability!r} outside [0, 1]")
    return _kernels.pool_limits(
        float(state.n_vehicles), float(state.capacity_per_vehicle), float(state.fade), float(state.soc),
        float(state.soc_min), float(state.soc_max), float(availability), float(charger_power),
        float(efficiency), float(efficiency),
    )


def apply_degradation(
    state: FleetState,
    discharged: float,
    fade_per_fce: float = 0.2 / 3000.0,
    year: int | None = None,
) -> FleetState:
    """Linear throughput fade; replace the fleet's batteries at 80% capacity.

    ``discharged`` is energy removed from the pool (kWh). The SOC fraction is
    kept across fade and replacement, so the pool stays inside its window.
    """
    if discharged < 0:
        raise ValidationError("discharged energy must be >= 0")
    if discharged == 0:
        return state
    fce = discharged / state.nameplate if state.nameplate > 0 else 0.0
    fade = state.fade - fade_per_fce * fce
    replacements = state.replacements
    if fade <= REPLACEMENT_THRESHOLD + _FADE_TOL:
        fade = 1.0
        replacements = replacements + (year,)
    soc = state.soc * (fade / state.fade)
    return replace(
        state,
        fade=fade,
        soc=soc,
        cumulative_discharge=state.cumulative_discharge + discharged,
        replacements=replacements,
    )
