"""Output tables, JSON documents and run manifests.

Every file is written to a temporary sibling first and moved into place with
``os.replace``, so readers never see a half-written artifact. Floats are
emitted with ``repr`` so identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .coherence import CoherenceMap
from .dispatch import FLOW_NAMES, EnergyFlows, mean_daily_profile
from .economics import IndicatorSet
from .sweep import SweepResult

SUMMARY_COLUMNS = (
    "Optimal PV capacity",
    "Self-consumption",
    "Self-sufficiency",
    "Energy sufficiency",
    "Cost saving",
    "CO₂ emission reduction",
)


# ---------------------------------------------------------------------------
# Low-level writers
# ---------------------------------------------------------------------------


def atomic_write_bytes(path, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def json_text(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Table builders
# ---------------------------------------------------------------------------


def flows_csv(flows: EnergyFlows) -> str:
    """Hourly year-1 flow decomposition in kWh, one row per hour."""
    rows = zip(range(flows.load.size), *(getattr(flows, n) for n in FLOW_NAMES))
    return csv_text(("hour", *FLOW_NAMES), rows)


def daily_profile_csv(flows: EnergyFlows) -> str:
    """Mean kWh by hour of day for each supply route, plus mean load."""
    prof = mean_daily_profile(flows)
    load = flows.load.reshape(-1, 24).mean(axis=0)
    names = list(prof)
    rows = ([h, *(prof[n][h] for n in names), load[h]] for h in range(24))
    return csv_text(("hour_of_day", *names, "load"), rows)


def indicators_csv(ind: IndicatorSet) -> str:
    d = ind.as_dict()
    return csv_text(list(d), [list(d.values())])


def sweep_csv(result: SweepResult) -> str:
    """One row per coverage point. ``npv_savings`` excludes vehicle fuel; the
    ``*_with_fuel`` columns include it."""
    fields = list(result.points[0].as_dict())
    return csv_text(fields, ([p.as_dict()[f] for f in fields] for p in result.points))


def optimum_document(result: SweepResult) -> dict:
    best = result.optimum
    return {
        "criterion": "max npv_savings (vehicle fuel excluded)",
        "index": result.optimum_index,
        "coverage": best.coverage,
        "capacity_kw": best.capacity_kw,
        "capacity_gw": best.capacity_kw / 1e6,
        "currency": best.currency,
        "indicators": best.as_dict(),
    }


def summary_row(ind: IndicatorSet) -> list:
    """Capacity in GW, shares and savings in percent; cost saving counts
    vehicle fuel."""
    pct = lambda v: None if v is None else 100.0 * v  # noqa: E731
    return [
        ind.capacity_kw / 1e6,
        pct(ind.self_consumption),
        pct(ind.self_sufficiency),
        pct(ind.energy_sufficiency),
        ind.cost_saving_pct,
        ind.co2_reduction_pct,
    ]


def summary_csv(rows: Sequence[IndicatorSet]) -> str:
    header = ("region", "system", "period", "fit_enabled", "currency", *SUMMARY_COLUMNS)
    body = ([r.region, r.system, r.period, r.fit_enabled, r.currency, *summary_row(r)] for r in rows)
    return csv_text(header, body)


def scan_csv(tilts, azimuths, matrix) -> str:
    """Annual kWh per kW; rows are tilts, columns azimuths."""
    m = np.asarray(matrix, dtype=float)
    header = ["tilt\\azimuth", *(_cell(float(a)) for a in azimuths)]
    return csv_text(header, ([float(t), *m[i]] for i, t in enumerate(tilts)))


def grid_csv(periods, grid) -> str:
    """Rows are periods (hours), columns hour indices."""
    g = np.asarray(grid)
    if g.dtype == bool:
        g = g.astype(int)
    header = ["period_h", *map(str, range(g.shape[1]))]
    return csv_text(header, ([float(p), *g[i]] for i, p in enumerate(periods)))


def write_coherence(cmap: CoherenceMap, out_dir) -> list[Path]:
    out = Path(out_dir)
    paths = [
        atomic_write_text(out / "coherence.csv", grid_csv(cmap.periods, cmap.coherence)),
        atomic_write_text(out / "phase.csv", grid_csv(cmap.periods, cmap.phase)),
    ]
    if cmap.mask is not None:
        paths.append(atomic_write_text(out / "mask.csv", grid_csv(cmap.periods, cmap.mask)))
    paths.append(atomic_write_text(out / "coi.csv", csv_text(("hour", "coi_period_h"), zip(range(cmap.coi.size), cmap.coi))))
    return paths


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


@dataclass
class RunManifest:
    """What a command read, what it wrote, and with which settings."""

    command: str
    config: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)  # label -> {"path", "sha256"}
    outputs: list = field(default_factory=list)  # [{"file", "sha256"}]
    version: str = __version__
    started: str = ""
    finished: str = ""

    def add_input(self, label: str, path) -> None:
        self.inputs[label] = {"path": os.fspath(path), "sha256": sha256_file(path)}

    def add_output(self, path) -> None:
        self.outputs.append({"file": Path(path).name, "sha256": sha256_file(path)})

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
        }


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(manifest: RunManifest, out_dir) -> Path:
    manifest.finished = utc_now()
    return atomic_write_text(Path(out_dir) / "manifest.json", json_text(manifest.as_dict()))


def verify_manifest(path) -> list[str]:
    """Names of listed outputs whose digest no longer matches."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    bad = []
    for entry in doc["outputs"]:
        target = path.parent / entry["file"]
        if not target.exists() or sha256_file(target) != entry["sha256"]:
            bad.append(entry["file"])
    return bad
