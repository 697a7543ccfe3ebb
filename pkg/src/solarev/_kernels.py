"""JIT-compiled scalar steps for the hourly fleet/dispatch fold.

Both the public per-hour functions and the year loop call these, so there is
exactly one implementation of the priority cascade.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# columns of the per-hour output matrix
PV_TO_LOAD, PV_TO_BATT, PV_TO_GRID, BATT_TO_LOAD, GRID_TO_LOAD, CURTAILED, SOC = range(7)
N_COLUMNS = 7


@njit(cache=True, nogil=True)
def pool_limits(n_vehicles, capacity_per_vehicle, fade, soc, soc_min, soc_max,
                availability, charger_power, eta_c, eta_d):
    """(max_charge, max_discharge, headroom, reserve) for one hour.

    Energies in kWh. Only the present share of the pool is reachable; the
    charge bound is PV energy drawn, the discharge bound is energy delivered.
    """
    usable = fade * n_vehicles * capacity_per_vehicle
    headroom = availability * max(soc_max * usable - soc, 0.0)
    reserve = availability * max(soc - soc_min * usable, 0.0)
    power = availability * n_vehicles * charger_power
    max_charge = min(power, headroom / eta_c)
    max_discharge = min(power, reserve * eta_d)
    return max_charge, max_discharge, headroom, reserve


@njit(cache=True, nogil=True)
def dispatch_step(pv, load, soc, max_charge, max_discharge, eta_c, eta_d, soc_lo, soc_hi, export_cap):
    """Greedy self-consumption cascade for one hour.

    Returns (pv_to_load, pv_to_batt, pv_to_grid, batt_to_load, grid_to_load,
    curtailed, new_soc). ``export_cap < 0`` means unlimited export.
    """
    pv_to_load = min(pv, load)
    surplus = pv - pv_to_load
    deficit = load - pv_to_load

    pv_to_batt = min(surplus, max_charge)
    exportable = surplus - pv_to_batt
    if export_cap >= 0.0 and exportable > export_cap:
        pv_to_grid = export_cap
        curtailed = exportable - export_cap
    else:
        pv_to_grid = exportable
        curtailed = 0.0

    batt_to_load = min(deficit, max_discharge)
    grid_to_load = deficit - batt_to_load

    new_soc = soc + pv_to_batt * eta_c - batt_to_load / eta_d
    # absorb rounding at the window edges
    if new_soc > soc_hi:
        new_soc = soc_hi
    if new_soc < soc_lo:
        new_soc = soc_lo
    return pv_to_load, pv_to_batt, pv_to_grid, batt_to_load, grid_to_load, curtailed, new_soc


@njit(cache=True, nogil=True)
def year_fold(pv, load, availability, n_vehicles, capacity_per_vehicle, fade, soc0,
              soc_min, soc_max, charger_power, eta_c, eta_d, export_cap, has_fleet):
    """Fold :func:`dispatch_step` over all hours; fade is held fixed.

    Returns (hourly matrix, final soc, energy removed from the pool).
    """
    n = pv.shape[0]
    out = np.zeros((n, N_COLUMNS))
    usable = fade * n_vehicles * capacity_per_vehicle
    lo = soc_min * usable
    hi = soc_max * usable
    soc = soc0
    removed = 0.0
    for t in range(n):
        if has_fleet:
            max_c, max_d, _, _ = pool_limits(n_vehicles, capacity_per_vehicle, fade, soc,
                                             soc_min, soc_max, availability[t],
                                             charger_power, eta_c, eta_d)
        else:
            max_c = 0.0
            max_d = 0.0
        r = dispatch_step(pv[t], load[t], soc, max_c, max_d, eta_c, eta_d, lo, hi, export_cap)
        for k in range(6):
            out[t, k] = r[k]
        removed += r[3] / eta_d
        soc = r[6] if has_fleet else 0.0
        out[t, SOC] = soc
    return out, soc, removed
