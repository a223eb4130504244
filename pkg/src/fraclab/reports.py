"""Report serialization.

report.json is the deterministic artifact: sorted keys, no timestamps, and
non-finite floats spelled as the strings "inf"/"-inf"/"nan" so the document
stays strict JSON. Wall-clock data lives only in manifest.json. CSV tables
are comma-separated with a header row; .dat files are gnuplot-ready,
whitespace-separated, with comment headers naming the inequality the series
instantiates.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field as dc_field, is_dataclass
from pathlib import Path

from ._kernels import backend_name
from ._version import __version__
from .errors import ConfigInvalid
from .verify import BootstrapPlan, DecayFit, LedgerReport


def _sanitize(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if obj == math.inf:
            return "inf"
        if obj == -math.inf:
            return "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if is_dataclass(obj) and not isinstance(obj, type):
        return _sanitize(asdict(obj))
    if hasattr(obj, "tolist"):
        return _sanitize(obj.tolist())
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _sanitize(obj.item())
    return obj


def report_payload(obj) -> dict:
    """Flatten a result object into its JSON form."""
    if isinstance(obj, LedgerReport):
        return {
            "type": "ledger",
            "inequality_id": obj.inequality_id,
            "inferred_constant": _sanitize(obj.inferred_constant),
            "stable": obj.stable,
            "pass": obj.passed,
            "samples": [
                {
                    "descriptor": _sanitize(s.descriptor),
                    "lhs": _sanitize(s.lhs),
                    "rhs": _sanitize(s.rhs),
                    "margin": _sanitize(s.margin),
                }
                for s in obj.samples
            ],
        }
    if isinstance(obj, DecayFit):
        return {"type": "decay-fit", **_sanitize(asdict(obj))}
    if isinstance(obj, BootstrapPlan):
        payload = _sanitize(asdict(obj))
        payload["m0"] = "inf" if obj.m0 == math.inf else int(obj.m0)
        return {"type": "bootstrap-plan", **payload}
    if is_dataclass(obj) and not isinstance(obj, type):
        return {"type": type(obj).__name__.lower(), **_sanitize(asdict(obj))}
    if isinstance(obj, dict):
        return _sanitize(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__} into a report")


def dumps_report(document: dict) -> str:
    return json.dumps(_sanitize(document), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(out_dir, document: dict) -> Path:
    path = Path(out_dir) / "report.json"
    path.write_text(dumps_report(document), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Tables.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlotSeries:
    """One data series: a CSV table plus its gnuplot twin.

    `inequality` is the human-readable statement the numbers instantiate; it
    becomes the comment header of the .dat file.
    """

    name: str
    inequality: str
    columns: tuple
    rows: list


def _fmt(v) -> str:
    v = _sanitize(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(out_dir, series: PlotSeries) -> Path:
    path = Path(out_dir) / f"{series.name}.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(series.columns)
        for row in series.rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_plot_data(out_dir, series: PlotSeries) -> Path:
    path = Path(out_dir) / f"{series.name}.dat"
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"# {series.inequality}\n")
        fh.write("# " + "  ".join(str(c) for c in series.columns) + "\n")
        for row in series.rows:
            fh.write("  ".join(_fmt(v) for v in row) + "\n")
    return path


def emit_plot_data(out_dir, series_list: list[PlotSeries]) -> list[Path]:
    if not series_list:
        raise ConfigInvalid("emit_plot_data needs at least one series")
    out = []
    for s in series_list:
        out.append(write_csv(out_dir, s))
        out.append(write_plot_data(out_dir, s))
    return out


# ---------------------------------------------------------------------------
# Manifest.
# ---------------------------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str = __version__
    backend: str = backend_name
    seed: int = 0
    workers: int = 1
    started_at: str = ""
    finished_at: str = ""
    stage_seconds: dict = dc_field(default_factory=dict)
    outputs: list = dc_field(default_factory=list)
    error: str | None = None

    def start(self) -> "RunManifest":
        self.started_at = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        self._t0 = time.perf_counter()
        return self

    def stage(self, name: str) -> None:
        now = time.perf_counter()
        self.stage_seconds[name] = round(now - self._t0, 6)
        self._t0 = now

    def finish(self) -> "RunManifest":
        self.finished_at = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        return self

    def write(self, out_dir) -> Path:
        path = Path(out_dir) / "manifest.json"
        doc = {
            "command": self.command,
            "config": _sanitize(self.config),
            "version": self.version,
            "backend": self.backend,
            "seed": self.seed,
            "workers": self.workers,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "stage_seconds": _sanitize(self.stage_seconds),
            "outputs": [str(p) for p in self.outputs],
            "error": self.error,
        }
        path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        return path
