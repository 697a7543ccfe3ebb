"""Cashflows, NPV, cost saving, energy indicators and CO2 metrics."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import FuelAssumptions, RegionProfile, ScenarioConfig, System, ValidationError
from .dispatch import EnergyFlows, HorizonResult


def npv(cashflow, rate: float) -> float:
    """Discounted sum with year 0 undiscounted."""
    if not rate > -1:
        raise ValidationError(f"discount rate must be > -1, got {rate!r}")
    cf = np.asarray(cashflow, dtype=float)
    return float(np.sum(cf / (1.0 + rate) ** np.arange(cf.size)))


def cost_saving_pct(npv_cost: float, horizon: int, base_annual_cost: float) -> float:
    """Percent by which the mean yearly scenario cost undercuts the base yearly cost."""
    if not base_annual_cost > 0:
        raise ValidationError(f"base annual cost must be > 0, got {base_annual_cost!r}")
    return (1.0 - (npv_cost / horizon) / base_annual_cost) * 100.0


# ---------------------------------------------------------------------------
# Vehicle fuel
# ---------------------------------------------------------------------------


def annual_fleet_km(profile: RegionProfile) -> tuple[float, float]:
    """Annual km driven by (gasoline, diesel) cars.

    Cars not classified as diesel are treated as gasoline.
    """
    per_car = profile.weekday_use_fraction * profile.avg_km_per_car_day * 365.0
    diesel = profile.n_diesel
    gasoline = profile.n_vehicles - diesel
    return gasoline * per_car, diesel * per_car


def annual_fuel(profile: RegionProfile, fuel: FuelAssumptions) -> tuple[float, float]:
    """(EUR/yr, kg CO2/yr) of the combustion fleet."""
    km_g, km_d = annual_fleet_km(profile)
    litres_g = km_g * fuel.gasoline_l_per_100km / 100.0
    litres_d = km_d * fuel.diesel_l_per_100km / 100.0
    cost = litres_g * fuel.gasoline_eur_per_l + litres_d * fuel.diesel_eur_per_l
    co2 = litres_g * fuel.gasoline_kg_co2_per_l + litres_d * fuel.diesel_kg_co2_per_l
    return cost, co2


# ---------------------------------------------------------------------------
# Cashflow ledger
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CashflowLedger:
    """Per-year costs (EUR, index 0..N). Positive = cost, FIT revenue negative."""

    capex: np.ndarray
    om: np.ndarray
    grid_purchases: np.ndarray
    fit_revenue: np.ndarray
    replacements: np.ndarray
    fuel: np.ndarray
    base_grid_purchases: np.ndarray
    base_fuel: np.ndarray

    @property
    def scenario(self) -> np.ndarray:
        return self.capex + self.om + self.grid_purchases - self.fit_revenue + self.replacements + self.fuel

    @property
    def base(self) -> np.ndarray:
        return self.base_grid_purchases + self.base_fuel

    def as_dict(self) -> dict[str, list[float]]:
        out = {k: v.tolist() for k, v in asdict(self).items()}
        out["scenario"] = self.scenario.tolist()
        out["base"] = self.base.tolist()
        return out


def build_cashflows(
    horizon: HorizonResult,
    config: ScenarioConfig,
    profile: RegionProfile,
    include_fuel: bool,
    capacity_kw: float,
    base_load_kwh: float,
) -> CashflowLedger:
    """Scenario and base ledgers over years 0..N.

    The base buys ``base_load_kwh`` (load without EV charging) at retail every
    year and, with ``include_fuel``, pays for combustion-fleet fuel. PV-only
    scenarios keep paying that fuel; PV+EV scenarios pay none.
    """
    n = horizon.horizon
    if n != config.horizon:
        raise ValidationError(f"horizon result has {n} years, config says {config.horizon}")
    size = n + 1
    zeros = lambda: np.zeros(size)  # noqa: E731
    capex, om, grid, fit, repl, fuel, base_grid, base_fuel = (zeros() for _ in range(8))

    has_fleet = config.system is System.PV_EV
    capex[0] = config.pv_capex * 1000.0 * capacity_kw
    if has_fleet and config.v2h_capex:
        capex[0] += config.v2h_capex * profile.n_vehicles * config.battery_per_vehicle
    fuel_cost = annual_fuel(profile, config.fuel)[0] if include_fuel else 0.0

    for y in range(1, size):
        flows = horizon.years[y - 1]
        escalation = (1.0 + config.price_escalation) ** (y - 1)
        tariff = config.retail_tariff * escalation
        om[y] = config.om_cost * capacity_kw
        grid[y] = flows.total("grid_to_load") * tariff
        if config.fit_enabled:
            fit[y] = flows.total("pv_to_grid") * config.fit_rate * escalation
        if has_fleet:
            repl[y] = horizon.replacements_in(y) * config.battery_replacement_cost * profile.n_vehicles
        else:
            fuel[y] = fuel_cost
        base_grid[y] = base_load_kwh * tariff
        base_fuel[y] = fuel_cost
    return CashflowLedger(capex, om, grid, fit, repl, fuel, base_grid, base_fuel)


# ---------------------------------------------------------------------------
# Indicators
# ---------------------------------------------------------------------------


def energy_indicators(flows: EnergyFlows) -> tuple[float | None, float, float]:
    """(self-consumption, self-sufficiency, energy sufficiency).

    Self-consumption is ``None`` when nothing was produced.
    """
    a = flows.annual() if isinstance(flows, EnergyFlows) else dict(flows)
    load = a["load_total"]
    if not load > 0:
        raise ValidationError("energy indicators need a positive load")
    used = a["pv_to_load"] + a["batt_to_load"]
    produced = used + a["pv_to_grid"]
    es = produced / load
    ss = used / load
    sc = used / produced if produced > 0 else None
    return sc, ss, es


def co2_metrics(
    flows: EnergyFlows,
    profile: RegionProfile,
    fuel: FuelAssumptions,
    system: System,
    base_load_kwh: float | None = None,
) -> tuple[float, float]:
    """(reduction %, abatement kg CO2 per kWh of demand).

    Base = base load on the grid + combustion-fleet tailpipe CO2. The scenario
    imports from the grid; PV-only keeps the tailpipe CO2, PV+EV drops it.
    """
    factor = profile.grid_emission_factor
    if factor < 0:
        raise ValidationError("grid emission factor must be >= 0")
    _, ss, _ = energy_indicators(flows)
    abatement = factor * ss
    if base_load_kwh is None:
        base_load_kwh = flows.load_total
    fuel_co2 = annual_fuel(profile, fuel)[1]
    base = base_load_kwh * factor + fuel_co2
    scenario = flows.total("grid_to_load") * factor
    if System(system) is System.PV_ONLY:
        scenario += fuel_co2
    reduction = (1.0 - scenario / base) * 100.0 if base > 0 else 0.0
    return reduction, abatement


@dataclass(frozen=True)
class IndicatorSet:
    """Headline numbers for one scenario point.

    ``npv_savings`` = NPV(base) - NPV(scenario), fuel excluded (benefit > 0).
    ``npv_cost`` is the scenario's net present cost fed to the cost-saving
    formula. ``*_with_fuel`` variants include combustion-fleet fuel.
    """

    region: str
    system: str
    period: int
    fit_enabled: bool
    coverage: float
    capacity_kw: float
    self_consumption: float | None
    self_sufficiency: float
    energy_sufficiency: float
    capacity_factor: float | None
    npv_savings: float
    npv_savings_with_fuel: float
    npv_cost: float
    npv_cost_with_fuel: float
    cost_saving_pct: float
    cost_saving_pct_no_fuel: float
    co2_reduction_pct: float
    co2_abatement_per_kwh: float
    currency: str

    def as_dict(self) -> dict:
        return asdict(self)


def indicators_from_run(
    horizon: HorizonResult,
    config: ScenarioConfig,
    profile: RegionProfile,
    capacity_kw: float,
    base_load_kwh: float,
    region: str | None = None,
) -> IndicatorSet:
    year1 = horizon.years[0]
    sc, ss, es = energy_indicators(year1)
    cf = year1.pv.sum() / (capacity_kw * year1.pv.size) if capacity_kw > 0 else None
    ledgers = {
        fuel: build_cashflows(horizon, config, profile, fuel, capacity_kw, base_load_kwh)
        for fuel in (False, True)
    }
    npv_cost = {k: npv(v.scenario, config.discount_rate) for k, v in ledgers.items()}
    npv_base = {k: npv(v.base, config.discount_rate) for k, v in ledgers.items()}
    base_annual = {k: float(v.base[1]) for k, v in ledgers.items()}
    reduction, abatement = co2_metrics(year1, profile, config.fuel, config.system, base_load_kwh)
    return IndicatorSet(
        region=region or profile.name,
        system=config.system.value,
        period=config.period,
        fit_enabled=config.fit_enabled,
        coverage=config.coverage,
        capacity_kw=capacity_kw,
        self_consumption=sc,
        self_sufficiency=ss,
        energy_sufficiency=es,
        capacity_factor=None if cf is None else float(cf),
        npv_savings=npv_base[False] - npv_cost[False],
        npv_savings_with_fuel=npv_base[True] - npv_cost[True],
        npv_cost=npv_cost[False],
        npv_cost_with_fuel=npv_cost[True],
        cost_saving_pct=cost_saving_pct(npv_cost[True], config.horizon, base_annual[True]),
        cost_saving_pct_no_fuel=cost_saving_pct(npv_cost[False], config.horizon, base_annual[False]),
        co2_reduction_pct=reduction,
        co2_abatement_per_kwh=abatement,
        currency=config.currency_label,
    )
