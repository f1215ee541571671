"""Executable case studies: catalog, calibration, runs, headline metrics.

A scenario is one simulated day (96 steps) of one case variant: a year,
a season, a household-EV penetration, optional park-&-ride facilities
and the optimization flag.  The bundled catalog (data/cases.json)
encodes the four case studies:

  I   single year 2020, penetrations 0 / 11 / 35 / 45 %, households only
  II  medium penetration over 2020/2023/2026 with quoted demand growth
  III year 2020, 35 % households plus three 1000-lot park-&-ride
      facilities, with and without schedule optimization
  IV  long-term 2020/2025/2030 at 10/30/50 % with 0.9 %/yr growth and
      the facilities included

Baseline demand is calibrated once per grid: a uniform multiplier on
MV/LV demand is fitted by bisection so the worst-case scenario (winter,
45 % penetration) loads the primary transformer to the target percent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .charging import FacilitySpec, generate_sessions, schedule_min_peak, schedule_unoptimized
from .errors import CalibrationError, PowerFlowError
from .model import Grid
from .powerflow import RadialNetwork, SolutionSeries, SolveOptions, run_quasi_dynamic
from .profiles import (
    N_STEPS,
    STEP_HOURS,
    EvFleetSpec,
    GrowthModel,
    ProfileLibrary,
    TimeSeriesProfile,
    build_household_ev_profile,
    compose_bus_injections,
    default_library,
)

CASES = ("I", "II", "III", "IV")
BASE_YEAR = 2020

# Calibration anchor: worst-case household scenario and its target loading
ANCHOR_PENETRATION = 0.45
ANCHOR_SEASON = "winter"
ANCHOR_TARGET_LOADING_PERCENT = 83.87
ANCHOR_TOLERANCE_PT = 0.1

DEFAULT_PR_OCCUPANCY = 0.7


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation run's recipe."""

    id: str
    case: str
    year: int
    season: str
    household_penetration: float
    optimized: bool = False
    growth_rate_per_year: float = 0.0
    growth_overrides: dict[int, float] = field(default_factory=dict)
    pr_facilities: tuple[FacilitySpec, ...] = ()
    pr_occupancy: float = DEFAULT_PR_OCCUPANCY
    seed: int = 0

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}")
        if not 0.0 <= self.household_penetration <= 1.0:
            raise ValueError("household_penetration must be within [0, 1]")
        if self.case in ("I", "II") and self.pr_facilities:
            raise ValueError(f"case {self.case} scenarios carry no park-&-ride facilities")
        if self.case == "III" and self.household_penetration > 0 and len(self.pr_facilities) != 3:
            raise ValueError("case III scenarios carry exactly 3 facilities")

    def growth_model(self) -> GrowthModel:
        return GrowthModel(
            base_year=BASE_YEAR,
            customer_growth_per_year=self.growth_rate_per_year,
            overrides=dict(self.growth_overrides),
        )


@dataclass(frozen=True)
class CaseResult:
    """Headline metrics plus plot-ready per-step series of one scenario run."""

    scenario: ScenarioSpec
    peak_mw: float
    par: float
    max_voltage_deviation_percent: float
    max_trafo_loading_percent: float
    ev_energy_mwh: float
    demand_scale: float
    primary_loading_series_percent: tuple[float, ...]
    primary_p_series_mw: tuple[float, ...]
    worst_mv_voltage_series_pu: tuple[float, ...]
    series: SolutionSeries | None = field(default=None, repr=False, compare=False)
    series_ref: str | None = None
    pr_profile_unoptimized_kw: tuple[float, ...] | None = None
    pr_profile_optimized_kw: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "scenario": scenario_to_dict(self.scenario),
            "peak_mw": self.peak_mw,
            "par": self.par,
            "max_voltage_deviation_percent": self.max_voltage_deviation_percent,
            "max_trafo_loading_percent": self.max_trafo_loading_percent,
            "ev_energy_mwh": self.ev_energy_mwh,
            "demand_scale": self.demand_scale,
            "primary_loading_series_percent": self.primary_loading_series_percent,
            "primary_p_series_mw": self.primary_p_series_mw,
            "worst_mv_voltage_series_pu": self.worst_mv_voltage_series_pu,
            "series_ref": self.series_ref,
            "pr_profile_unoptimized_kw": self.pr_profile_unoptimized_kw,
            "pr_profile_optimized_kw": self.pr_profile_optimized_kw,
        }

    @staticmethod
    def from_dict(doc: dict) -> "CaseResult":
        return CaseResult(
            scenario=scenario_from_dict(doc["scenario"]),
            peak_mw=doc["peak_mw"],
            par=doc["par"],
            max_voltage_deviation_percent=doc["max_voltage_deviation_percent"],
            max_trafo_loading_percent=doc["max_trafo_loading_percent"],
            ev_energy_mwh=doc["ev_energy_mwh"],
            demand_scale=doc["demand_scale"],
            primary_loading_series_percent=tuple(doc["primary_loading_series_percent"]),
            primary_p_series_mw=tuple(doc["primary_p_series_mw"]),
            worst_mv_voltage_series_pu=tuple(doc["worst_mv_voltage_series_pu"]),
            series_ref=doc.get("series_ref"),
            pr_profile_unoptimized_kw=_as_tuple(doc.get("pr_profile_unoptimized_kw")),
            pr_profile_optimized_kw=_as_tuple(doc.get("pr_profile_optimized_kw")),
        )


def _as_tuple(values):
    return None if values is None else tuple(values)


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    return {
        "id": spec.id,
        "case": spec.case,
        "year": spec.year,
        "season": spec.season,
        "household_penetration": spec.household_penetration,
        "optimized": spec.optimized,
        "growth_rate_per_year": spec.growth_rate_per_year,
        "growth_overrides": {str(y): m for y, m in sorted(spec.growth_overrides.items())},
        "pr_facilities": [
            {
                "id": f.id,
                "connection_bus": f.connection_bus,
                "n_chargers": f.n_chargers,
                "charger_kw": f.charger_kw,
                "nominal_power_kw": f.nominal_power_kw,
            }
            for f in spec.pr_facilities
        ],
        "pr_occupancy": spec.pr_occupancy,
        "seed": spec.seed,
    }


def scenario_from_dict(doc: dict) -> ScenarioSpec:
    return ScenarioSpec(
        id=doc["id"],
        case=doc["case"],
        year=int(doc["year"]),
        season=doc["season"],
        household_penetration=float(doc["household_penetration"]),
        optimized=bool(doc.get("optimized", False)),
        growth_rate_per_year=float(doc.get("growth_rate_per_year", 0.0)),
        growth_overrides={int(y): float(m) for y, m in doc.get("growth_overrides", {}).items()},
        pr_facilities=tuple(
            FacilitySpec(
                id=f["id"],
                connection_bus=f["connection_bus"],
                n_chargers=int(f.get("n_chargers", 1000)),
                charger_kw=float(f.get("charger_kw", 3.3)),
                nominal_power_kw=f.get("nominal_power_kw"),
            )
            for f in doc.get("pr_facilities", [])
        ),
        pr_occupancy=float(doc.get("pr_occupancy", DEFAULT_PR_OCCUPANCY)),
        seed=int(doc.get("seed", 0)),
    )


def load_catalog(path=None) -> list[ScenarioSpec]:
    """Load the scenario catalog from a file, or the bundled one."""
    if path is None:
        text = resources.files("gridsim_ev").joinpath("data/cases.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    doc = json.loads(text)
    return [scenario_from_dict(rec) for rec in doc["scenarios"]]


def filter_catalog(catalog, case=None, season=None):
    return [
        s
        for s in catalog
        if (case is None or s.case == case) and (season is None or s.season == season)
    ]


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def compute_par(samples) -> float:
    """Peak-to-average ratio of a daily power series."""
    arr = np.asarray(list(samples), dtype=float)
    if not arr.size or arr.max() <= 0:
        raise ValueError("PAR needs at least one positive sample")
    return float(arr.max() / arr.mean())


def compute_max_voltage_deviation(series: SolutionSeries, buses) -> float:
    """Max over steps and buses of |1 - V| in percent."""
    bus_ids = [b.id if hasattr(b, "id") else b for b in buses]
    worst = 0.0
    for solution in series:
        if not solution.converged:
            raise PowerFlowError("series contains a non-converged snapshot")
        for bus_id in bus_ids:
            deviation = abs(1.0 - solution.v_magnitude_pu[bus_id])
            if deviation > worst:
                worst = deviation
    return worst * 100.0


# ---------------------------------------------------------------------------
# Scenario execution
# ---------------------------------------------------------------------------


# schedules depend only on the facility, occupancy and seed; scenario
# batches reuse them heavily (same facilities across years and variants)
_schedule_cache: dict[tuple, tuple] = {}


def _facility_schedules(facility: FacilitySpec, occupancy: float, seed: int):
    key = (
        facility.id,
        facility.n_chargers,
        facility.charger_kw,
        facility.nominal_power_kw,
        occupancy,
        seed,
    )
    if key not in _schedule_cache:
        sessions = generate_sessions(facility, occupancy, seed=seed)
        unopt = schedule_unoptimized(sessions, facility)
        opt = schedule_min_peak(sessions, facility)
        _schedule_cache[key] = (unopt, opt)
    return _schedule_cache[key]


def _facility_profiles(spec: ScenarioSpec):
    """Both schedules (baseline and min-peak) summed per connection bus.

    Returns (per-bus profile dict for the injection composition,
    unoptimized aggregate, optimized aggregate, served energy in kWh).
    """
    if not spec.pr_facilities:
        return {}, None, None, 0.0
    per_bus: dict[str, TimeSeriesProfile] = {}
    total_unopt = np.zeros(N_STEPS)
    total_opt = np.zeros(N_STEPS)
    energy_kwh = 0.0
    for k, facility in enumerate(spec.pr_facilities):
        unopt, opt = _facility_schedules(facility, spec.pr_occupancy, seed=spec.seed + 7919 * (k + 1))
        total_unopt += np.asarray(unopt.facility_profile_kw)
        total_opt += np.asarray(opt.facility_profile_kw)
        chosen = opt if spec.optimized else unopt
        energy_kwh += sum(chosen.facility_profile_kw) * STEP_HOURS
        profile = TimeSeriesProfile(
            id=f"{facility.id}_{'opt' if spec.optimized else 'unopt'}",
            values=chosen.facility_profile_kw,
            season=spec.season,
            klass="pr_facility",
        )
        if facility.connection_bus in per_bus:
            merged = tuple(
                a + b for a, b in zip(per_bus[facility.connection_bus].values, profile.values)
            )
            profile = replace(profile, values=merged)
        per_bus[facility.connection_bus] = profile
    return (
        per_bus,
        tuple(float(v) for v in total_unopt),
        tuple(float(v) for v in total_opt),
        energy_kwh,
    )


def run_case(
    grid: Grid,
    spec: ScenarioSpec,
    demand_scale: float,
    profiles: ProfileLibrary | None = None,
    options: SolveOptions | None = None,
    network: RadialNetwork | None = None,
) -> CaseResult:
    """Simulate one scenario and compute its headline metrics."""
    library = profiles or default_library()
    net = network if network is not None else RadialNetwork(grid)
    growth = spec.growth_model()

    fleet = EvFleetSpec(penetration=spec.household_penetration, seed=spec.seed)
    ev_profile = build_household_ev_profile(fleet, grid.total_households(), season=spec.season)
    pr_per_bus, pr_unopt, pr_opt, pr_energy_kwh = _facility_profiles(spec)

    injections = [
        compose_bus_injections(
            grid,
            library,
            year=spec.year,
            season=spec.season,
            step=step,
            growth=growth,
            demand_scale=demand_scale,
            ev_household=ev_profile,
            pr_profiles=pr_per_bus,
        )
        for step in range(N_STEPS)
    ]
    try:
        series = run_quasi_dynamic(grid, injections, options=options, network=net)
    except PowerFlowError as exc:
        raise PowerFlowError(f"scenario {spec.id!r}: {exc}", step=exc.step) from exc

    primary_id = grid.primary_transformer.id
    p_series = series.transformer_p_series_mw(primary_id)
    loading_series = series.transformer_loading_series(primary_id)
    mv_bus_ids = [b.id for b in grid.mv_buses()]
    worst_voltage = tuple(
        min(solution.v_magnitude_pu[b] for b in mv_bus_ids) for solution in series
    )
    return CaseResult(
        scenario=spec,
        peak_mw=float(max(p_series)),
        par=compute_par(p_series),
        max_voltage_deviation_percent=compute_max_voltage_deviation(series, grid.mv_buses()),
        max_trafo_loading_percent=float(max(loading_series)),
        ev_energy_mwh=(ev_profile.energy_kwh() + pr_energy_kwh) / 1000.0,
        demand_scale=demand_scale,
        primary_loading_series_percent=tuple(loading_series),
        primary_p_series_mw=tuple(p_series),
        worst_mv_voltage_series_pu=worst_voltage,
        series=series,
        pr_profile_unoptimized_kw=pr_unopt,
        pr_profile_optimized_kw=pr_opt,
    )


def run_cases(
    grid: Grid,
    specs,
    demand_scale: float,
    profiles: ProfileLibrary | None = None,
    options: SolveOptions | None = None,
) -> dict[str, CaseResult]:
    """Run a batch of scenarios over one shared network reduction."""
    library = profiles or default_library()
    network = RadialNetwork(grid)
    results = {}
    for spec in specs:
        results[spec.id] = run_case(
            grid, spec, demand_scale, profiles=library, options=options, network=network
        )
    return results


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------


def anchor_scenario(catalog=None) -> ScenarioSpec:
    """The scenario the baseline is fitted against."""
    catalog = catalog if catalog is not None else load_catalog()
    for spec in catalog:
        if (
            spec.case == "I"
            and spec.season == ANCHOR_SEASON
            and abs(spec.household_penetration - ANCHOR_PENETRATION) < 1e-9
        ):
            return spec
    raise CalibrationError("catalog does not contain the calibration anchor scenario")


def calibrate_baseline(
    grid: Grid,
    anchor: dict | None = None,
    profiles: ProfileLibrary | None = None,
    options: SolveOptions | None = None,
    base_demand_scale: float = 1.0,
    catalog=None,
    max_iterations: int = 40,
) -> float:
    """Fit the uniform MV/LV demand multiplier by bisection.

    The returned factor makes the anchor scenario's primary-transformer
    peak loading hit the target within ANCHOR_TOLERANCE_PT.  Raises
    CalibrationError when the target cannot be bracketed within
    multiplier bounds [0.1, 3.0].
    """
    anchor = anchor or {}
    target = float(anchor.get("target_loading_percent", ANCHOR_TARGET_LOADING_PERCENT))
    spec = anchor_scenario(catalog)
    if "penetration" in anchor or "season" in anchor:
        spec = replace(
            spec,
            household_penetration=float(anchor.get("penetration", spec.household_penetration)),
            season=anchor.get("season", spec.season),
        )
    library = profiles or default_library()
    network = RadialNetwork(grid)

    def loading(scale: float) -> float:
        try:
            result = run_case(
                grid,
                spec,
                demand_scale=base_demand_scale * scale,
                profiles=library,
                options=options,
                network=network,
            )
        except PowerFlowError:
            # voltage collapse at this multiplier: firmly above any
            # loading target the calibration would be asked for
            return float("inf")
        return result.max_trafo_loading_percent

    lo, hi = 0.1, 3.0
    load_lo, load_hi = loading(lo), loading(hi)
    if not load_lo <= target <= load_hi:
        raise CalibrationError(
            f"target loading {target}% not reachable within multiplier bounds "
            f"[{lo}, {hi}] (range {load_lo:.2f}%..{load_hi:.2f}%)"
        )
    factor = 1.0
    for _ in range(max_iterations):
        factor = 0.5 * (lo + hi)
        achieved = loading(factor)
        if abs(achieved - target) <= ANCHOR_TOLERANCE_PT:
            return factor
        if achieved < target:
            lo = factor
        else:
            hi = factor
    raise CalibrationError(
        f"bisection did not reach {target}% +/- {ANCHOR_TOLERANCE_PT} pt "
        f"within {max_iterations} iterations"
    )
