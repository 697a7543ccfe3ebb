"""Hourly energy balance over one year and over the project horizon."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels as K
from .core import HourlySeries, RegionProfile, ScenarioConfig, ValidationError
from .fleet import AvailabilityProfile, FleetState, apply_degradation, availability_series

FLOW_NAMES = ("pv_to_load", "pv_to_batt", "pv_to_grid", "batt_to_load", "grid_to_load", "curtailed")
SUPPLY_NAMES = ("pv_to_load", "batt_to_load", "grid_to_load")


@dataclass(frozen=True, eq=False)
class EnergyFlows:
    """Hourly flow decomposition (kWh) plus the pool SOC trace."""

    pv_to_load: np.ndarray
    pv_to_batt: np.ndarray
    pv_to_grid: np.ndarray
    batt_to_load: np.ndarray
    grid_to_load: np.ndarray
    curtailed: np.ndarray
    load: np.ndarray
    pv: np.ndarray
    soc: np.ndarray | None = None
    window: tuple[float, float] = (0.0, 0.0)  # SOC bounds in force this year

    @classmethod
    def from_matrix(cls, matrix, load, pv, has_fleet, window=(0.0, 0.0)) -> "EnergyFlows":
        cols = [np.ascontiguousarray(matrix[:, k]) for k in range(6)]
        soc = np.ascontiguousarray(matrix[:, K.SOC]) if has_fleet else None
        return cls(*cols, load=np.asarray(load, float), pv=np.asarray(pv, float), soc=soc, window=window)

    def annual(self) -> dict[str, float]:
        out = {name: float(getattr(self, name).sum()) for name in FLOW_NAMES}
        out["load_total"] = self.load_total
        out["pv_total"] = float(self.pv.sum())
        return out

    @property
    def load_total(self) -> float:
        return float(self.load.sum())

    def total(self, name: str) -> float:
        return float(getattr(self, name).sum())

    def as_matrix(self) -> np.ndarray:
        return np.column_stack([getattr(self, n) for n in FLOW_NAMES])


@dataclass(frozen=True)
class HourFlows:
    pv_to_load: float
    pv_to_batt: float
    pv_to_grid: float
    batt_to_load: float
    grid_to_load: float
    curtailed: float


@dataclass(frozen=True, eq=False)
class HorizonResult:
    years: list  # EnergyFlows per project year
    fade_start: list  # fleet fade at the start of each year
    fade_end: list
    replacement_years: tuple
    pv_annual: list
    final_state: FleetState | None = None

    @property
    def horizon(self) -> int:
        return len(self.years)

    def replacements_in(self, year: int) -> int:
        return sum(1 for y in self.replacement_years if y == year)


def _export_cap(config: ScenarioConfig) -> float:
    return -1.0 if config.export_cap is None else float(config.export_cap)


def dispatch_hour(pv, load, state, limits, fit_enabled=True, efficiency=0.95, export_cap=None):
    """One hour of the greedy cascade: PV->load, charge, export, discharge, import.

    ``limits`` is the tuple from :func:`fleet_limits`; ``state`` may be None for
    PV-only systems. The FIT toggle changes revenue only, never flows.
    """
    del fit_enabled
    if pv < 0 or load < 0:
        raise ValidationError("pv and load must be >= 0")
    if state is None:
        max_c = max_d = soc = lo = hi = 0.0
    else:
        max_c, max_d = limits[0], limits[1]
        soc = state.soc
        lo, hi = state.window
    r = K.dispatch_step(
        float(pv), float(load), float(soc), float(max_c), float(max_d), efficiency, efficiency,
        float(lo), float(hi), -1.0 if export_cap is None else float(export_cap),
    )
    flows = HourFlows(*r[:6])
    new_state = None if state is None else _with_soc(state, r[6])
    return flows, new_state


def _with_soc(state: FleetState, soc: float) -> FleetState:
    return replace(state, soc=soc)


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, HourlySeries) else np.asarray(x, dtype=float)


def simulate_year(
    gen,
    demand,
    fleet: FleetState | None,
    config: ScenarioConfig,
    profile: AvailabilityProfile | None = None,
    *,
    year: int = 1,
    start_year: int | None = None,
) -> tuple[EnergyFlows, FleetState | None]:
    """Fold the hourly cascade over a year; degrade the fleet at year end.

    ``gen`` and ``demand`` may be :class:`HourlySeries` or equal-length arrays
    (short arrays are handy for toy checks). PV-only runs pass ``fleet=None``.
    """
    pv = _values(gen)
    load = _values(demand)
    if pv.shape != load.shape:
        raise ValidationError(f"length mismatch: generation {pv.size} vs demand {load.size}")
    if start_year is None:
        start_year = demand.start_year if isinstance(demand, HourlySeries) else 2019
    eta = config.roundtrip_split_efficiency
    if fleet is None:
        matrix, _, _ = K.year_fold(pv, load, np.ones_like(pv), 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
                                   eta, eta, _export_cap(config), False)
        return EnergyFlows.from_matrix(matrix, load, pv, False), None
    if profile is None:
        raise ValidationError("an AvailabilityProfile is required when a fleet is simulated")
    avail = availability_series(profile, start_year, pv.size)
    matrix, soc, removed = K.year_fold(
        pv, load, avail, float(fleet.n_vehicles), float(fleet.capacity_per_vehicle), float(fleet.fade),
        float(fleet.soc), float(fleet.soc_min), float(fleet.soc_max), float(config.charger_power),
        eta, eta, _export_cap(config), True,
    )
    flows = EnergyFlows.from_matrix(matrix, load, pv, True, fleet.window)
    after = _with_soc(fleet, soc)
    after = apply_degradation(after, removed, config.battery_fade_per_fce, year=year)
    return flows, after


def simulate_horizon(
    gen,
    demand,
    config: ScenarioConfig,
    profile: RegionProfile | None = None,
    fleet: FleetState | None = None,
) -> HorizonResult:
    """Repeat the reference year for every project year.

    PV output is scaled by (1 - pv_degradation)^(y-1); the fleet's SOC, fade
    and replacement history carry over from year to year.
    """
    pv0 = _values(gen)
    start_year = demand.start_year if isinstance(demand, HourlySeries) else 2019
    avail_profile = None
    if config.has_fleet:
        if profile is None:
            raise ValidationError("PV+EV horizon runs need a RegionProfile")
        avail_profile = AvailabilityProfile.for_scenario(profile, config)
        if fleet is None:
            fleet = FleetState.for_scenario(profile, config)
    else:
        fleet = None

    years, fade_start, fade_end, pv_annual = [], [], [], []
    for y in range(1, config.horizon + 1):
        pv = pv0 if y == 1 else pv0 * (1.0 - config.pv_degradation) ** (y - 1)
        fade_start.append(fleet.fade if fleet is not None else None)
        flows, fleet = simulate_year(pv, demand, fleet, config, avail_profile, year=y, start_year=start_year)
        years.append(flows)
        pv_annual.append(float(pv.sum()))
        fade_end.append(fleet.fade if fleet is not None else None)
    replacements = fleet.replacements if fleet is not None else ()
    return HorizonResult(years, fade_start, fade_end, tuple(replacements), pv_annual, fleet)


def mean_daily_profile(flows: EnergyFlows) -> dict[str, np.ndarray]:
    """Mean supply by hour of day for PV->load, battery->load and grid->load."""
    n = flows.load.size
    if n % 24:
        raise ValidationError("flows must cover whole days")
    return {name: getattr(flows, name).reshape(n // 24, 24).mean(axis=0) for name in SUPPLY_NAMES}
