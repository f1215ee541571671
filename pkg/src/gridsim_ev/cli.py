"""Command-line orchestration.

Subcommands::

    synthesize  --seed N --out grid.json
    calibrate   --grid grid.json --out calib.json
    run         --grid grid.json --calib calib.json [--cases cases.json]
                [--case I|II|III|IV] [--season winter|summer] --out-dir DIR
    optimize-pr --sessions sessions.csv --facility facility.json
                [--verify] --out schedule.csv
    report      --in DIR --format csv|json

All state flows through flags and files; no environment is required.
Exit codes: 0 success, 2 format error, 3 validation failure,
4 power-flow failure, 5 calibration failure, 6 schedule failure,
1 anything else.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import report as report_mod
from .charging import (
    FacilitySpec,
    read_sessions_csv,
    schedule_min_peak,
    verify_schedule,
    write_schedule_csv,
)
from .errors import (
    CalibrationError,
    GridFormatError,
    GridSimError,
    GridValidationError,
    PowerFlowError,
    ScheduleError,
)
from .gridio import load_grid, serialize_grid, validate_grid
from .scenarios import calibrate_baseline, filter_catalog, load_catalog, run_cases
from .synth import synthesize_reference_grid

EXIT_CODES = {
    GridFormatError: 2,
    GridValidationError: 3,
    PowerFlowError: 4,
    CalibrationError: 5,
    ScheduleError: 6,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridsim-ev", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synthesize", help="emit the seeded reference grid")
    p_synth.add_argument("--seed", type=int, required=True)
    p_synth.add_argument("--out", type=Path, required=True)

    p_cal = sub.add_parser("calibrate", help="fit the baseline demand multiplier")
    p_cal.add_argument("--grid", type=Path, required=True)
    p_cal.add_argument("--out", type=Path, required=True)
    p_cal.add_argument("--target", type=float, default=None, help="target loading percent")
    p_cal.add_argument("--cases", type=Path, default=None, help="scenario catalog file")

    p_run = sub.add_parser("run", help="run the case-study catalog")
    p_run.add_argument("--grid", type=Path, required=True)
    p_run.add_argument("--calib", type=Path, required=True)
    p_run.add_argument("--cases", type=Path, default=None)
    p_run.add_argument("--case", choices=("I", "II", "III", "IV"), default=None)
    p_run.add_argument("--season", choices=("winter", "summer"), default=None)
    p_run.add_argument("--out-dir", type=Path, required=True)

    p_opt = sub.add_parser("optimize-pr", help="min-peak schedule for a session set")
    p_opt.add_argument("--sessions", type=Path, required=True)
    p_opt.add_argument("--facility", type=Path, required=True)
    p_opt.add_argument("--verify", action="store_true")
    p_opt.add_argument("--out", type=Path, required=True)

    p_rep = sub.add_parser("report", help="re-emit tables from a run directory")
    p_rep.add_argument("--in", dest="in_dir", type=Path, required=True)
    p_rep.add_argument("--format", choices=("csv", "json"), default="csv")

    return parser


def _load_grid_file(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise GridFormatError(f"cannot read grid file {path}: {exc}") from exc
    return load_grid(text)


def _cmd_synthesize(args) -> int:
    grid = synthesize_reference_grid(args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(serialize_grid(grid, indent=2) + "\n")
    print(f"wrote {args.out} ({len(grid.buses)} buses, {len(grid.branches)} branches)")
    return 0


def _cmd_calibrate(args) -> int:
    grid = _load_grid_file(args.grid)
    report = validate_grid(grid)
    if not report.ok:
        raise GridValidationError(str(report))
    catalog = load_catalog(args.cases)
    anchor = {} if args.target is None else {"target_loading_percent": args.target}
    factor = calibrate_baseline(grid, anchor=anchor, catalog=catalog)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    doc = {"demand_scale": factor, "grid": str(args.grid)}
    if args.target is not None:
        doc["target_loading_percent"] = args.target
    args.out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"calibrated demand scale: {factor:.6f}")
    return 0


def _read_calibration(path: Path) -> float:
    try:
        doc = json.loads(path.read_text())
        return float(doc["demand_scale"])
    except (OSError, ValueError, KeyError) as exc:
        raise GridFormatError(f"bad calibration file {path}: {exc}") from exc


def _cmd_run(args) -> int:
    grid = _load_grid_file(args.grid)
    report = validate_grid(grid)
    if not report.ok:
        raise GridValidationError(str(report))
    demand_scale = _read_calibration(args.calib)
    catalog = filter_catalog(load_catalog(args.cases), case=args.case, season=args.season)
    if not catalog:
        raise GridFormatError("no scenarios selected by the given filters")

    results = run_cases(grid, catalog, demand_scale)

    out_dir = args.out_dir
    tables_dir = out_dir / "tables"
    plots_dir = out_dir / "plots"
    series_dir = out_dir / "series"
    series_dir.mkdir(parents=True, exist_ok=True)
    outputs: dict[str, str] = {}

    final_results = []
    for sid, result in sorted(results.items()):
        series_path = series_dir / f"{sid}.csv"
        _write_series_csv(result, series_path)
        outputs[f"series/{sid}"] = f"series/{sid}.csv"
        final_results.append(_with_series_ref(result, f"series/{sid}.csv"))
        for path in report_mod.export_plot_data(result, plots_dir):
            outputs[f"plots/{path.name}"] = f"plots/{path.name}"

    for path in report_mod.emit_case_tables(final_results, tables_dir):
        outputs[f"tables/{path.name}"] = f"tables/{path.name}"

    manifest = report_mod.RunManifest(
        tool_version=report_mod.TOOL_VERSION,
        grid_path=str(args.grid),
        grid_seed=None,
        calibration_factor=demand_scale,
        scenario_ids=tuple(sorted(results)),
        outputs=outputs,
    )
    manifest.write(out_dir / "manifest.json")
    print(f"ran {len(results)} scenario(s); outputs under {out_dir}")
    return 0


def _with_series_ref(result, ref: str):
    from dataclasses import replace

    return replace(result, series_ref=ref)


def _write_series_csv(result, path: Path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["step", "primary_p_mw", "primary_loading_percent", "worst_mv_voltage_pu"]
        )
        for step in range(len(result.primary_p_series_mw)):
            writer.writerow(
                [
                    step,
                    repr(result.primary_p_series_mw[step]),
                    repr(result.primary_loading_series_percent[step]),
                    repr(result.worst_mv_voltage_series_pu[step]),
                ]
            )


def _cmd_optimize_pr(args) -> int:
    try:
        doc = json.loads(args.facility.read_text())
        facility = FacilitySpec(
            id=doc["id"],
            connection_bus=doc["connection_bus"],
            n_chargers=int(doc.get("n_chargers", 1000)),
            charger_kw=float(doc.get("charger_kw", 3.3)),
            nominal_power_kw=doc.get("nominal_power_kw"),
        )
    except (OSError, ValueError, KeyError) as exc:
        raise GridFormatError(f"bad facility file {args.facility}: {exc}") from exc
    try:
        sessions = read_sessions_csv(args.sessions)
    except (OSError, ValueError, KeyError) as exc:
        raise GridFormatError(f"bad sessions file {args.sessions}: {exc}") from exc

    result = schedule_min_peak(sessions, facility)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    summary_path = args.out.with_suffix(".summary.csv")
    write_schedule_csv(result, args.out, summary_path=summary_path)
    print(f"peak_kw,feasible\n{result.peak_kw:.6f},{str(result.feasible).lower()}")
    if args.verify:
        verification = verify_schedule(sessions, result, facility)
        if not verification.ok:
            raise ScheduleError(str(verification))
        print("verification: ok")
    return 0


def _cmd_report(args) -> int:
    aggregate = args.in_dir / "tables" / "results.json"
    if not aggregate.exists():
        raise GridFormatError(f"no results.json under {args.in_dir}")
    results = report_mod.load_case_tables(aggregate)
    if args.format == "json":
        print(json.dumps({k: r.to_dict() for k, r in results.items()}, indent=2, sort_keys=True))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(
            ["scenario", "season", "year", "penetration", "peak_mw", "par",
             "max_voltage_dev_pct", "max_trafo_loading_pct"]
        )
        for sid, r in results.items():
            writer.writerow(
                [
                    sid,
                    r.scenario.season,
                    r.scenario.year,
                    r.scenario.household_penetration,
                    f"{r.peak_mw:.4g}",
                    f"{r.par:.4g}",
                    f"{r.max_voltage_deviation_percent:.4g}",
                    f"{r.max_trafo_loading_percent:.4g}",
                ]
            )
    return 0


_COMMANDS = {
    "synthesize": _cmd_synthesize,
    "calibrate": _cmd_calibrate,
    "run": _cmd_run,
    "optimize-pr": _cmd_optimize_pr,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except GridSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for klass, code in EXIT_CODES.items():
            if isinstance(exc, klass):
                return code
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
