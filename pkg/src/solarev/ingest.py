"""CSV ingest for weather and demand years, plus linear rescaling helpers."""
from __future__ import annotations

import calendar
import csv
import io
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    HOURS_PER_YEAR,
    LEAP_HOURS,
    HourlySeries,
    SeriesError,
    ValidationError,
    validate_series,
)

WEATHER_COLUMNS = ("ghi", "dni", "dhi", "temp", "wind")

# multiplier to kWh per hourly row
DEMAND_UNITS = {
    "kwh": 1.0,
    "mwh": 1e3,
    "gwh": 1e6,
    "kw": 1.0,  # hourly mean power == energy per hour
    "mw": 1e3,
    "gw": 1e6,
}


class IngestError(ValidationError):
    """Raised for malformed input files."""


@dataclass(frozen=True, eq=False)
class Site:
    latitude: float
    longitude: float
    utc_offset: float = 0.0


@dataclass(frozen=True, eq=False)
class WeatherYear:
    ghi: HourlySeries
    dni: HourlySeries
    dhi: HourlySeries
    temperature: HourlySeries
    wind_speed: HourlySeries
    latitude: float
    longitude: float
    utc_offset: float = 0.0

    def __post_init__(self):
        series = (self.ghi, self.dni, self.dhi, self.temperature, self.wind_speed)
        for s in series:
            validate_series(s)
        if len({s.start_year for s in series}) != 1:
            raise SeriesError("weather series disagree on start_year")
        for name in ("ghi", "dni", "dhi"):
            if getattr(self, name).unit != "W/m2":
                raise SeriesError(f"{name} must be in W/m2")

    @property
    def start_year(self) -> int:
        return self.ghi.start_year

    @property
    def site(self) -> Site:
        return Site(self.latitude, self.longitude, self.utc_offset)


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def _read_text(path) -> str:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return fh.read()


def _split_comments(text: str) -> tuple[dict[str, str], list[str]]:
    """Pull ``# key: value`` header lines out; return (meta, remaining lines)."""
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            content = stripped.lstrip("#").strip()
            if ":" in content:
                key, _, value = content.partition(":")
                meta[key.strip().lower()] = value.strip()
            continue
        if stripped:
            body.append(line)
    return meta, body


def _parse_columns(text: str, required: tuple[str, ...], source: str):
    meta, lines = _split_comments(text)
    if not lines:
        raise IngestError(f"{source}: row count 0")
    reader = csv.reader(io.StringIO("\n".join(lines)))
    header = [h.strip().lower() for h in next(reader)]
    for col in required:
        if col not in header:
            raise IngestError(f"{source}: missing column {col}")
    idx = {col: header.index(col) for col in required}
    rows = list(reader)
    if not rows:
        raise IngestError(f"{source}: row count 0")
    data = np.empty((len(rows), len(required)))
    for r, row in enumerate(rows):
        for c, col in enumerate(required):
            try:
                data[r, c] = float(row[idx[col]])
            except (IndexError, ValueError):
                cell = row[idx[col]] if idx[col] < len(row) else "<missing>"
                # +2: header line and 1-based rows
                raise IngestError(f"{source}: unparseable cell {cell!r} at row {r + 2}, column {col}") from None
    return meta, data


def _year_from(meta: dict[str, str], year: int | None, source: str) -> int | None:
    if year is not None:
        return int(year)
    if "year" in meta:
        try:
            return int(meta["year"])
        except ValueError:
            raise IngestError(f"{source}: bad year header {meta['year']!r}") from None
    return None


def drop_leap_day(data: np.ndarray, year: int | None, source: str) -> tuple[np.ndarray, int]:
    """Drop the Feb 29 block from an 8784-row year; return (rows, start_year)."""
    n = data.shape[0]
    if n == HOURS_PER_YEAR:
        if year is not None and calendar.isleap(year):
            raise IngestError(f"{source}: {year} is a leap year but only {n} rows were given")
        return data, 2019 if year is None else year
    if n == LEAP_HOURS:
        if year is None:
            year = 2020
        elif not calendar.isleap(year):
            raise IngestError(f"{source}: {LEAP_HOURS} rows but {year} is not a leap year")
        start = (31 + 28) * 24
        return np.delete(data, np.s_[start : start + 24], axis=0), year
    raise IngestError(f"{source}: row count {n} is not {HOURS_PER_YEAR} (or {LEAP_HOURS} for a leap year)")


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


def load_weather(csv_path, site: Site, year: int | None = None) -> WeatherYear:
    """Load an hourly weather year (columns ghi,dni,dhi,temp,wind).

    ``year`` overrides an optional ``# year:`` header; leap years are cut to
    8760 rows by dropping Feb 29.
    """
    source = os.fspath(csv_path)
    meta, data = _parse_columns(_read_text(csv_path), WEATHER_COLUMNS, source)
    data, start_year = drop_leap_day(data, _year_from(meta, year, source), source)
    irr = [HourlySeries(data[:, i], "W/m2", start_year) for i in range(3)]
    try:
        return WeatherYear(
            *irr,
            temperature=HourlySeries(data[:, 3], "degC", start_year),
            wind_speed=HourlySeries(data[:, 4], "m/s", start_year),
            latitude=site.latitude,
            longitude=site.longitude,
            utc_offset=site.utc_offset,
        )
    except SeriesError as exc:
        raise IngestError(f"{source}: {exc}") from None


def load_demand(csv_path, unit: str | None = None, year: int | None = None) -> HourlySeries:
    """Load an hourly demand column and convert it to kWh.

    The unit comes from ``unit`` or a ``# unit:`` header line (kWh, MWh, GWh,
    or hourly-mean kW/MW/GW).
    """
    source = os.fspath(csv_path)
    meta, data = _parse_columns(_read_text(csv_path), ("demand",), source)
    unit = unit if unit is not None else meta.get("unit")
    if unit is None:
        raise IngestError(f"{source}: no unit declared (add a '# unit:' line or pass unit=)")
    factor = DEMAND_UNITS.get(unit.strip().lower())
    if factor is None:
        raise IngestError(f"{source}: unknown unit flag {unit!r}")
    data, start_year = drop_leap_day(data, _year_from(meta, year, source), source)
    try:
        return validate_series(HourlySeries(data[:, 0] * factor, "kWh", start_year))
    except SeriesError as exc:
        raise IngestError(f"{source}: {exc}") from None


def scale_irradiance(w: WeatherYear, coeff: float) -> WeatherYear:
    """Multiply GHI, DNI and DHI by ``coeff``; temperature and wind are kept."""
    if not 0.0 < coeff <= 1.5:
        raise ValidationError(f"irradiance coefficient {coeff!r} outside (0, 1.5]")
    return WeatherYear(
        ghi=w.ghi.with_values(w.ghi.values * coeff),
        dni=w.dni.with_values(w.dni.values * coeff),
        dhi=w.dhi.with_values(w.dhi.values * coeff),
        temperature=w.temperature,
        wind_speed=w.wind_speed,
        latitude=w.latitude,
        longitude=w.longitude,
        utc_offset=w.utc_offset,
    )


def derive_scaled_demand(source: HourlySeries, factor: float) -> HourlySeries:
    """Scale every hour by ``factor`` (Paris = 0.18 x IdF; 2030 uplift = 1.08)."""
    if not factor > 0:
        raise ValidationError(f"demand factor must be > 0, got {factor!r}")
    return source.with_values(source.values * factor)


def write_weather_csv(w: WeatherYear, path, *, precision: int = 3) -> None:
    cols = np.column_stack(
        [w.ghi.values, w.dni.values, w.dhi.values, w.temperature.values, w.wind_speed.values]
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# year: {w.start_year}\n")
        fh.write(",".join(WEATHER_COLUMNS) + "\n")
        for row in cols:
            fh.write(",".join(f"{v:.{precision}f}" for v in row) + "\n")


def write_demand_csv(s: HourlySeries, path, unit: str = "MWh", *, precision: int = 3) -> None:
    factor = DEMAND_UNITS[unit.lower()]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# unit: {unit}\n# year: {s.start_year}\ndemand\n")
        for v in s.values / factor:
            fh.write(f"{v:.{precision}f}\n")


def read_series_csv(path: Path | str, column: str = "value", unit: str = "1") -> HourlySeries:
    """Generic single-column loader used by the coherence command."""
    source = os.fspath(path)
    meta, data = _parse_columns(_read_text(path), (column,), source)
    data, start_year = drop_leap_day(data, _year_from(meta, None, source), source)
    return validate_series(HourlySeries(data[:, 0], unit, start_year))
