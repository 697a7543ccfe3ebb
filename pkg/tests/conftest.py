from __future__ import annotations

import numpy as np
import pytest

from solarev.core import HourlySeries, build_scenario
from solarev.ingest import WeatherYear
from solarev.synthetic import bundled_region


def make_weather(ghi, dni=None, dhi=None, temp=None, wind=None, lat=48.9, lon=2.4, utc_offset=1.0, year=2019):
    n = 8760
    full = lambda v, d: np.full(n, d, dtype=float) if v is None else np.broadcast_to(np.asarray(v, float), (n,))  # noqa: E731
    ghi = full(ghi, 0.0)
    return WeatherYear(
        HourlySeries(ghi, "W/m2", year),
        HourlySeries(full(dni, 0.0), "W/m2", year),
        HourlySeries(full(dhi, 0.0), "W/m2", year),
        HourlySeries(full(temp, 15.0), "degC", year),
        HourlySeries(full(wind, 2.0), "m/s", year),
        lat, lon, utc_offset,
    )


@pytest.fixture(scope="session")
def paris():
    return bundled_region("Paris")


@pytest.fixture(scope="session")
def idf():
    return bundled_region("IleDeFrance")


@pytest.fixture(scope="session")
def kyoto():
    return bundled_region("Kyoto")


@pytest.fixture
def pvev_2030(paris):
    return build_scenario({"system": "PVEV", "period": 2030}, paris.profile)


# ---------------------------------------------------------------------------
# Acceptance summary: one line per criterion at the end of the run
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: dict[str, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    detail = dict(report.user_properties).get("detail", "")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if report.outcome == "skipped" and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2].removeprefix("Skipped: ")
        ACCEPTANCE_LINES[crit] = f"{status} {crit}: {detail}".rstrip(": ")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    key = lambda c: (int("".join(ch for ch in c.split()[0] if ch.isdigit()) or 0), c)  # noqa: E731
    for crit in sorted(ACCEPTANCE_LINES, key=key):
        terminalreporter.write_line(ACCEPTANCE_LINES[crit])
