"""``solarev`` command line.

Exit codes: 0 success, 1 invalid input or configuration, 2 file I/O failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import tomli_w

from . import __version__
from .coherence import coherence_with_significance, dyadic_periods
from .core import ConfigError, RegionProfile, ValidationError, build_scenario, config_to_dict, profile_to_dict, region_preset
from .ingest import Site, derive_scaled_demand, load_demand, load_weather, read_series_csv, scale_irradiance
from .pv import array_from_config, calibrate_system_loss, capacity_factor, generation_series, tilt_azimuth_scan
from .report import (
    RunManifest,
    atomic_write_text,
    daily_profile_csv,
    flows_csv,
    json_text,
    optimum_document,
    scan_csv,
    summary_csv,
    sweep_csv,
    utc_now,
    write_coherence,
    write_manifest,
)
from .sweep import parse_grid, run_scenario_detail, sweep_coverage
from .synthetic import bundled_demand, bundled_weather

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Usage errors count as invalid input (exit 1), not I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Shared loading
# ---------------------------------------------------------------------------


def _read_config(path) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None


def _region_and_config(args, manifest: RunManifest):
    raw = _read_config(args.config)
    if args.config:
        manifest.add_input("config", args.config)
    name = args.region or raw.pop("region", None) or getattr(args, "region_default", None)
    raw.pop("region", None)
    if not name:
        raise ConfigError("no region given (use --region or a 'region' key)", "region")
    profile = region_preset(name)
    config = build_scenario(raw, profile)
    manifest.config = {"region": profile.name, **config_to_dict(config)}
    return profile, config


def _site(profile: RegionProfile) -> Site:
    return Site(profile.latitude, profile.longitude, profile.utc_offset)


def _weather(args, profile: RegionProfile, manifest: RunManifest):
    if getattr(args, "weather", None):
        manifest.add_input("weather", args.weather)
        return load_weather(args.weather, _site(profile))
    manifest.inputs["weather"] = {"bundled": f"synthetic {profile.name} year"}
    return bundled_weather(profile.name)


def _demand(args, profile: RegionProfile, manifest: RunManifest):
    if args.demand:
        manifest.add_input("demand", args.demand)
        series = load_demand(args.demand, unit=args.demand_unit)
    else:
        manifest.inputs["demand"] = {"bundled": f"synthetic {profile.name} year"}
        series = bundled_demand(profile.name)
    if args.demand_scale != 1.0:
        series = derive_scaled_demand(series, args.demand_scale)
    return series


def _start(command: str) -> RunManifest:
    return RunManifest(command=command, started=utc_now())


def _finish(manifest: RunManifest, out: Path, written) -> None:
    for p in written:
        manifest.add_output(p)
    write_manifest(manifest, out)


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"expected a comma-separated number list, got {text!r}") from None
    if not vals:
        raise ValidationError("empty number list")
    return vals


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_run(args) -> int:
    out = Path(args.out)
    manifest = _start("run")
    profile, config = _region_and_config(args, manifest)
    weather = _weather(args, profile, manifest)
    demand = _demand(args, profile, manifest)
    run = run_scenario_detail(config, profile, weather, demand)
    ind = run.indicators
    year1 = run.horizon.years[0]
    doc = {
        "indicators": ind.as_dict(),
        "capacity_gw": run.capacity_kw / 1e6,
        "notes": {
            "npv_savings": "vehicle fuel excluded",
            "npv_savings_with_fuel": "vehicle fuel included",
            "cost_saving_pct": "vehicle fuel included",
            "cost_saving_pct_no_fuel": "vehicle fuel excluded",
            "energy indicators": "project year 1",
        },
        "replacement_years": list(run.horizon.replacement_years),
    }
    written = [
        atomic_write_text(out / "indicators.json", json_text(doc)),
        atomic_write_text(out / "flows.csv", flows_csv(year1)),
        atomic_write_text(out / "daily_profile.csv", daily_profile_csv(year1)),
    ]
    _finish(manifest, out, written)
    print(f"{profile.name} {config.system.value} {config.period}: SC={_pct(ind.self_consumption)} "
          f"SS={_pct(ind.self_sufficiency)} ES={_pct(ind.energy_sufficiency)} -> {out}")
    return EXIT_OK


def _pct(v) -> str:
    return "n/a" if v is None else f"{100 * v:.1f}%"


def cmd_sweep(args) -> int:
    out = Path(args.out)
    manifest = _start("sweep")
    profile, config = _region_and_config(args, manifest)
    weather = _weather(args, profile, manifest)
    demand = _demand(args, profile, manifest)
    grid = parse_grid(args.grid) if args.grid else None
    if args.threads < 1:
        raise ValidationError("--threads must be >= 1")
    result = sweep_coverage(config, profile, weather, demand, grid, threads=args.threads)
    manifest.config["grid"] = list(result.grid)
    written = [
        atomic_write_text(out / "sweep.csv", sweep_csv(result)),
        atomic_write_text(out / "optimum.json", json_text(optimum_document(result))),
        atomic_write_text(out / "summary.csv", summary_csv([result.optimum])),
    ]
    _finish(manifest, out, written)
    best = result.optimum
    print(f"optimum coverage {best.coverage:.2f} ({best.capacity_kw / 1e6:.3f} GW), "
          f"NPV savings {best.npv_savings:,.0f} {best.currency} -> {out}")
    return EXIT_OK


def cmd_scan(args) -> int:
    out = Path(args.out)
    manifest = _start("scan")
    profile, config = _region_and_config(args, manifest)
    weather = scale_irradiance(_weather(args, profile, manifest), config.irradiance_scale)
    tilts, azimuths = _float_list(args.tilts), _float_list(args.azimuths)
    matrix = tilt_azimuth_scan(weather, tilts, azimuths, array_from_config(config))
    manifest.config.update(tilts=tilts, azimuths=azimuths)
    written = [atomic_write_text(out / "scan.csv", scan_csv(tilts, azimuths, matrix))]
    _finish(manifest, out, written)
    i, j = np.unravel_index(int(np.argmax(matrix)), matrix.shape)
    print(f"best tilt {tilts[i]:g}, azimuth {azimuths[j]:g}: {matrix[i, j]:.1f} kWh/kW -> {out}")
    return EXIT_OK


def cmd_coherence(args) -> int:
    out = Path(args.out)
    manifest = _start("coherence")
    x = read_series_csv(args.x, column=args.x_column)
    y = read_series_csv(args.y, column=args.y_column)
    manifest.add_input("x", args.x)
    manifest.add_input("y", args.y)
    periods = dyadic_periods(args.min_period, args.max_period)
    manifest.config = {
        "x_column": args.x_column,
        "y_column": args.y_column,
        "min_period": args.min_period,
        "max_period": args.max_period,
        "n_surrogates": args.n_surrogates,
        "alpha": args.alpha,
        "seed": args.seed,
        "detrend": args.detrend,
    }
    cmap = coherence_with_significance(
        x, y, periods=periods, n_surrogates=args.n_surrogates, alpha=args.alpha,
        seed=args.seed, detrend=args.detrend, threads=args.threads,
    )
    written = write_coherence(cmap, out)
    _finish(manifest, out, written)
    print(f"significant in-COI area {100 * cmap.significant_fraction():.1f}% -> {out}")
    return EXIT_OK


def _toml_ready(d: dict) -> dict:
    """Whole-number floats as integers, so counts read naturally."""
    return {k: (int(v) if isinstance(v, float) and v.is_integer() and abs(v) < 2**53 else v) for k, v in d.items()}


def preset_toml(name: str) -> str:
    return tomli_w.dumps(_toml_ready(profile_to_dict(region_preset(name))))


def cmd_preset(args) -> int:
    text = preset_toml(args.name)
    if not args.out:
        sys.stdout.write(text)
        return EXIT_OK
    out = Path(args.out)
    manifest = _start("preset dump")
    manifest.config = {"preset": region_preset(args.name).name}
    path = atomic_write_text(out / f"preset_{region_preset(args.name).name}.toml", text)
    _finish(manifest, out, [path])
    print(path)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    manifest = _start("calibrate")
    profile, config = _region_and_config(args, manifest)
    weather = scale_irradiance(_weather(args, profile, manifest), config.irradiance_scale)
    array = array_from_config(config)
    loss = calibrate_system_loss(weather, array, args.target_cf)
    cf = capacity_factor(generation_series(weather, replace(array, system_loss=loss)), 1.0)
    doc = {"region": profile.name, "target_capacity_factor": args.target_cf, "system_loss": loss, "capacity_factor": cf}
    if args.out:
        out = Path(args.out)
        path = atomic_write_text(out / "calibration.json", json_text(doc))
        _finish(manifest, out, [path])
    print(f"system_loss = {loss:.6f} (capacity factor {100 * cf:.2f}%)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _scenario_args(p: argparse.ArgumentParser, *, demand: bool = True) -> None:
    p.add_argument("--config", help="TOML scenario file")
    p.add_argument("--region", help="Paris, IleDeFrance or Kyoto (overrides the config's 'region')")
    p.add_argument("--weather", help="hourly weather CSV (ghi,dni,dhi,temp,wind); bundled synthetic year if omitted")
    if demand:
        p.add_argument("--demand", help="hourly base demand CSV; bundled synthetic year if omitted")
        p.add_argument("--demand-unit", help="unit when the demand file has no '# unit:' header")
        p.add_argument("--demand-scale", type=float, default=1.0, help="multiply the demand file by this factor")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="solarev", description="Rooftop PV and EV-fleet storage techno-economics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one scenario: indicators, hourly flows, daily profile")
    _scenario_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="coverage sweep with optimum and summary table")
    _scenario_args(p)
    p.add_argument("--grid", help="START:STOP:STEP coverage grid, STOP inclusive (default 0:0.71:0.01)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scan", help="annual yield (kWh/kW) over tilt x azimuth")
    _scenario_args(p, demand=False)
    p.add_argument("--tilts", default="0,10,20,30,40,50,60,70,80,90")
    p.add_argument("--azimuths", default="90,135,180,225,270")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scan, region_default="Paris")

    p = sub.add_parser("coherence", help="wavelet coherence of two hourly series with significance")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--x-column", default="value")
    p.add_argument("--y-column", default="value")
    p.add_argument("--min-period", type=float, default=2.0)
    p.add_argument("--max-period", type=float, default=4096.0)
    p.add_argument("--n-surrogates", type=int, default=300)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--detrend", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("preset", help="region presets")
    psub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)
    d = psub.add_parser("dump", help="print a preset as TOML")
    d.add_argument("name")
    d.add_argument("--out", help="directory for the TOML file and manifest")
    d.set_defaults(func=cmd_preset)

    p = sub.add_parser("calibrate", help="system loss that hits a target capacity factor")
    _scenario_args(p, demand=False)
    p.add_argument("--target-cf", type=float, default=0.111)
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate, region_default="Paris")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValidationError as exc:
        where = f" [{exc.field}]" if getattr(exc, "field", None) else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
