"""Result emission: case tables, per-step series, plot-ready data.

Everything is written as CSV/JSON; rendering is left to external
plotters.  Output is deterministic for identical inputs (sorted keys,
repr-formatted floats); only the run manifest carries a timestamp.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .scenarios import CaseResult

TOOL_VERSION = "0.1.0"


def _fmt4(value: float) -> str:
    """Four significant digits for human-facing tables."""
    return f"{value:.4g}"


def emit_case_tables(results, destination) -> list[Path]:
    """One CSV per case plus a JSON aggregate of every result.

    Raises ValueError on an empty result set before touching the
    destination.
    """
    results = list(results)
    if not results:
        raise ValueError("no results to emit")
    destination = Path(destination)
    destination.mkdir(parents=True, exist_ok=True)

    written = []
    by_case: dict[str, list[CaseResult]] = {}
    for result in results:
        by_case.setdefault(result.scenario.case, []).append(result)

    for case, case_results in sorted(by_case.items()):
        path = destination / f"case_{case}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [
                    "scenario",
                    "season",
                    "year",
                    "penetration",
                    "peak_mw",
                    "par",
                    "max_voltage_dev_pct",
                    "max_trafo_loading_pct",
                ]
            )
            for r in sorted(case_results, key=lambda r: r.scenario.id):
                writer.writerow(
                    [
                        r.scenario.id,
                        r.scenario.season,
                        r.scenario.year,
                        r.scenario.household_penetration,
                        _fmt4(r.peak_mw),
                        _fmt4(r.par),
                        _fmt4(r.max_voltage_deviation_percent),
                        _fmt4(r.max_trafo_loading_percent),
                    ]
                )
        written.append(path)

    aggregate = destination / "results.json"
    doc = {r.scenario.id: r.to_dict() for r in results}
    aggregate.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    written.append(aggregate)
    return written


def load_case_tables(path) -> dict[str, CaseResult]:
    """Parse the JSON aggregate back into CaseResult values."""
    doc = json.loads(Path(path).read_text())
    return {key: CaseResult.from_dict(rec) for key, rec in sorted(doc.items())}


def export_plot_data(result: CaseResult, destination) -> list[Path]:
    """Per-figure CSVs for one scenario: transformer loading vs step,
    worst MV voltage vs step, and (when facilities exist) the facility
    profile with unoptimized and optimized columns side by side."""
    destination = Path(destination)
    destination.mkdir(parents=True, exist_ok=True)
    stem = result.scenario.id
    written = []

    loading_path = destination / f"{stem}_trafo_loading.csv"
    with open(loading_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loading_percent"])
        for step, loading in enumerate(result.primary_loading_series_percent):
            writer.writerow([step, repr(loading)])
    written.append(loading_path)

    voltage_path = destination / f"{stem}_worst_voltage.csv"
    with open(voltage_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "voltage_pu"])
        for step, voltage in enumerate(result.worst_mv_voltage_series_pu):
            writer.writerow([step, repr(voltage)])
    written.append(voltage_path)

    if result.pr_profile_unoptimized_kw is not None:
        facility_path = destination / f"{stem}_facility.csv"
        with open(facility_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "unoptimized_kw", "optimized_kw"])
            for step in range(len(result.pr_profile_unoptimized_kw)):
                writer.writerow(
                    [
                        step,
                        repr(result.pr_profile_unoptimized_kw[step]),
                        repr(result.pr_profile_optimized_kw[step]),
                    ]
                )
        written.append(facility_path)
    return written


@dataclass(frozen=True)
class RunManifest:
    """Record of one `run` invocation; sufficient to re-run bit-identically."""

    tool_version: str
    grid_path: str
    grid_seed: int | None
    calibration_factor: float
    scenario_ids: tuple[str, ...]
    outputs: dict[str, str]
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def write(self, path):
        doc = {
            "tool_version": self.tool_version,
            "grid_path": self.grid_path,
            "grid_seed": self.grid_seed,
            "calibration_factor": self.calibration_factor,
            "scenario_ids": list(self.scenario_ids),
            "outputs": dict(sorted(self.outputs.items())),
            "timestamp": self.timestamp,
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

    @staticmethod
    def read(path) -> "RunManifest":
        doc = json.loads(Path(path).read_text())
        return RunManifest(
            tool_version=doc["tool_version"],
            grid_path=doc["grid_path"],
            grid_seed=doc.get("grid_seed"),
            calibration_factor=doc["calibration_factor"],
            scenario_ids=tuple(doc["scenario_ids"]),
            outputs=doc["outputs"],
            timestamp=doc["timestamp"],
        )
