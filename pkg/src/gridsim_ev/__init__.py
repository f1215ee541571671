"""gridsim-ev: distribution-grid simulation of EV charging impact.

Quasi-static daily power flow over a synthesized Italian-style MV
reference network, four EV-penetration case studies, and min-peak
charging-schedule optimization for park-&-ride facilities.
"""

from .charging import (
    ChargingSession,
    FacilitySpec,
    ScheduleResult,
    generate_sessions,
    schedule_min_peak,
    schedule_unoptimized,
    verify_schedule,
)
from .errors import (
    CalibrationError,
    GridFormatError,
    GridSimError,
    GridValidationError,
    PowerFlowError,
    ScheduleError,
)
from .gridio import ValidationReport, load_grid, serialize_grid, validate_grid
from .model import Branch, Bus, Generator, Grid, LoadPoint, Transformer
from .powerflow import (
    SnapshotInjections,
    SnapshotSolution,
    SolutionSeries,
    SolveOptions,
    run_quasi_dynamic,
    solve_snapshot,
)
from .profiles import (
    EvFleetSpec,
    GrowthModel,
    ProfileLibrary,
    TimeSeriesProfile,
    build_household_ev_profile,
    compose_bus_injections,
    default_library,
    scale_for_year,
)
from .report import RunManifest, emit_case_tables, export_plot_data
from .scenarios import (
    CaseResult,
    ScenarioSpec,
    calibrate_baseline,
    compute_max_voltage_deviation,
    compute_par,
    load_catalog,
    run_case,
    run_cases,
)
from .synth import synthesize_reference_grid

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "Bus",
    "CalibrationError",
    "CaseResult",
    "ChargingSession",
    "EvFleetSpec",
    "FacilitySpec",
    "Generator",
    "Grid",
    "GridFormatError",
    "GridSimError",
    "GridValidationError",
    "GrowthModel",
    "LoadPoint",
    "PowerFlowError",
    "ProfileLibrary",
    "RunManifest",
    "ScenarioSpec",
    "ScheduleError",
    "ScheduleResult",
    "SnapshotInjections",
    "SnapshotSolution",
    "SolutionSeries",
    "SolveOptions",
    "TimeSeriesProfile",
    "Transformer",
    "ValidationReport",
    "build_household_ev_profile",
    "calibrate_baseline",
    "compose_bus_injections",
    "compute_max_voltage_deviation",
    "compute_par",
    "default_library",
    "emit_case_tables",
    "export_plot_data",
    "generate_sessions",
    "load_catalog",
    "load_grid",
    "run_case",
    "run_cases",
    "run_quasi_dynamic",
    "scale_for_year",
    "schedule_min_peak",
    "schedule_unoptimized",
    "serialize_grid",
    "solve_snapshot",
    "synthesize_reference_grid",
    "validate_grid",
    "verify_schedule",
]
