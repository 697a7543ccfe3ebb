"""Roof coverage to capacity, single scenario runs, coverage sweeps and the
climate-isolating parameter swap."""
from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    MAX_COVERAGE,
    PANEL_AREA_PER_KW,
    HourlySeries,
    RegionProfile,
    ScenarioConfig,
    ValidationError,
)
from .dispatch import HorizonResult, simulate_horizon
from .economics import IndicatorSet, indicators_from_run
from .fleet import build_scenario_demand
from .ingest import WeatherYear, derive_scaled_demand, scale_irradiance
from .pv import array_from_config, specific_output


def coverage_to_capacity(
    roof_area: float,
    coverage: float,
    panel_area_per_kw: float = PANEL_AREA_PER_KW,
    max_coverage: float = MAX_COVERAGE,
) -> float:
    """PV capacity (kW) for panels covering ``coverage`` of the roof area.

    5 m2 of panel per kW; the usable-roof ceiling 5/7 turns that into the
    7 m2-per-kW full-roof allowance.
    """
    if not 0.0 <= coverage <= max_coverage + 1e-12:
        raise ValidationError(f"coverage {coverage!r} outside [0, {max_coverage:.6f}]")
    return roof_area * coverage / panel_area_per_kw


@dataclass(frozen=True, eq=False)
class RegionData:
    """A region's structural profile plus its weather and base (pre-EV) demand."""

    profile: RegionProfile
    weather: WeatherYear
    demand: HourlySeries


@dataclass(frozen=True, eq=False)
class ScenarioRun:
    indicators: IndicatorSet
    horizon: HorizonResult
    load: HourlySeries
    capacity_kw: float


def unit_generation(config: ScenarioConfig, weather: WeatherYear) -> np.ndarray:
    """Hourly kWh per kW for the config's array and irradiance scaling."""
    scaled = scale_irradiance(weather, config.irradiance_scale)
    return specific_output(scaled, array_from_config(config))


def run_scenario_detail(
    config: ScenarioConfig,
    profile: RegionProfile,
    weather: WeatherYear,
    demand: HourlySeries,
    *,
    unit_gen: np.ndarray | None = None,
) -> ScenarioRun:
    if unit_gen is None:
        unit_gen = unit_generation(config, weather)
    capacity = coverage_to_capacity(profile.roof_area, config.coverage, config.panel_area_per_kw, config.max_coverage)
    gen = capacity * unit_gen
    load = build_scenario_demand(demand, config, profile)
    horizon = simulate_horizon(gen, load, config, profile)
    indicators = indicators_from_run(horizon, config, profile, capacity, demand.total())
    return ScenarioRun(indicators, horizon, load, capacity)


def run_scenario(
    config: ScenarioConfig,
    profile: RegionProfile,
    weather: WeatherYear,
    demand: HourlySeries,
    *,
    unit_gen: np.ndarray | None = None,
) -> IndicatorSet:
    """Demand -> PV -> hourly dispatch over the horizon -> indicators."""
    return run_scenario_detail(config, profile, weather, demand, unit_gen=unit_gen).indicators


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SweepResult:
    grid: tuple
    points: tuple  # IndicatorSet per grid point
    optimum_index: int

    @property
    def optimum(self) -> IndicatorSet:
        return self.points[self.optimum_index]

    def curve(self, name: str) -> np.ndarray:
        vals = [getattr(p, name) for p in self.points]
        return np.array([np.nan if v is None else v for v in vals], dtype=float)


def default_grid(max_coverage: float = MAX_COVERAGE, step: float = 0.01) -> list[float]:
    n = int(np.floor(max_coverage / step + 1e-9))
    return [round(i * step, 10) for i in range(n + 1)]


def parse_grid(text: str) -> list[float]:
    """``START:STOP:STEP`` with STOP inclusive, e.g. ``0:0.71:0.01`` (72 points)."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ValidationError(f"grid {text!r} is not START:STOP:STEP") from None
    if step <= 0 or stop < start:
        raise ValidationError(f"grid {text!r} needs STEP > 0 and STOP >= START")
    n = int(np.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 10) for i in range(n + 1)]


def best_index(values) -> int:
    """Argmax; ties go to the earliest (smallest-capacity) point."""
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def sweep_coverage(
    config: ScenarioConfig,
    profile: RegionProfile,
    weather: WeatherYear,
    demand: HourlySeries,
    grid=None,
    *,
    threads: int = 1,
) -> SweepResult:
    """Run the scenario at every coverage point; the optimum maximizes
    ``npv_savings`` (fuel excluded)."""
    grid = default_grid(config.max_coverage) if grid is None else [float(g) for g in grid]
    if not grid:
        raise ValidationError("coverage grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValidationError("coverage grid must be strictly increasing")
    unit = unit_generation(config, weather)
    configs = [dataclasses.replace(config, coverage=c) for c in grid]

    def one(cfg):
        return run_scenario(cfg, profile, weather, demand, unit_gen=unit)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(one, configs))
    else:
        points = [one(c) for c in configs]
    idx = best_index([p.npv_savings for p in points])
    return SweepResult(tuple(grid), tuple(points), idx)


# ---------------------------------------------------------------------------
# Structure swap
# ---------------------------------------------------------------------------


def swapped_profile(donor: RegionProfile, host: RegionProfile) -> RegionProfile:
    """Donor's per-capita structure scaled to the host population.

    Per-capita demand, vehicles per capita, driving pattern and roof area per
    capita come from the donor; site, grid factor and prices from the host.
    """
    scale = host.population / donor.population
    return dataclasses.replace(
        host,
        name=f"{donor.name}-structure-in-{host.name}" if donor.name != host.name else host.name,
        roof_area=donor.roof_area * scale,
        demand_per_capita=donor.demand_per_capita,
        n_vehicles=donor.n_vehicles * scale,
        n_gasoline=donor.n_gasoline * scale,
        n_diesel=donor.n_diesel * scale,
        weekday_use_fraction=donor.weekday_use_fraction,
        avg_km_per_car_day=donor.avg_km_per_car_day,
    )


def sensitivity_swap(
    structure_from: RegionProfile,
    host: RegionData,
    config: ScenarioConfig,
    coverage: float | None = None,
) -> IndicatorSet:
    """Run the host's weather and demand shape under the donor's structure,
    so climate is the only remaining difference."""
    if host.weather is None or host.demand is None:
        raise ValidationError("host region needs weather and demand data")
    profile = swapped_profile(structure_from, host.profile)
    demand_scale = profile.demand_per_capita / host.profile.demand_per_capita
    demand = derive_scaled_demand(host.demand, demand_scale)
    if coverage is not None:
        config = dataclasses.replace(config, coverage=coverage)
    return run_scenario(config, profile, host.weather, demand)
