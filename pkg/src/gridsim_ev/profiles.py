"""Seasonal demand/generation profiles and per-step injection composition.

All shapes are 96-step per-unit curves (fraction of installed/rated
power, 15-minute resolution).  The built-in library is generated from
piecewise-linear (hour, value) tables: industrial MV customers run a
working-hours plateau, households show the classic double hump with an
evening peak, PV follows a daylight bell and rotating units run flat.
Absolute demand scale is fixed downstream by baseline calibration, so
only the shapes matter here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import Grid
from .powerflow.types import SnapshotInjections

N_STEPS = 96
STEP_HOURS = 0.25

SEASONS = ("winter", "summer")
PROFILE_CLASSES = ("mv_customer", "lv_household", "pv", "rotating_dg", "ev_household", "pr_facility")


@dataclass(frozen=True)
class TimeSeriesProfile:
    """A daily 96-step curve; per-unit for library shapes, kW for EV curves."""

    id: str
    values: tuple[float, ...]
    season: str
    klass: str

    def __post_init__(self):
        if len(self.values) != N_STEPS:
            raise ValueError(f"profile {self.id!r} must have {N_STEPS} samples")
        if any(v < 0 for v in self.values):
            raise ValueError(f"profile {self.id!r} has negative samples")
        if self.season not in SEASONS:
            raise ValueError(f"profile {self.id!r} has unknown season {self.season!r}")
        if self.klass not in PROFILE_CLASSES:
            raise ValueError(f"profile {self.id!r} has unknown class {self.klass!r}")

    def energy_kwh(self) -> float:
        """Integral over the day (meaningful for absolute-kW profiles)."""
        return sum(self.values) * STEP_HOURS


@dataclass(frozen=True)
class GrowthModel:
    """Demand growth relative to a base year.

    Compounds customer_growth_per_year unless an explicit multiplier
    override exists for the requested year (study-year multipliers are
    quoted directly where available).
    """

    base_year: int
    customer_growth_per_year: float = 0.0
    overrides: dict[int, float] = field(default_factory=dict)

    def demand_multiplier(self, year: int) -> float:
        if year < self.base_year:
            raise ValueError(f"year {year} precedes base year {self.base_year}")
        if year == self.base_year:
            return 1.0
        if year in self.overrides:
            return self.overrides[year]
        return (1.0 + self.customer_growth_per_year) ** (year - self.base_year)


def scale_for_year(profile: TimeSeriesProfile, growth: GrowthModel, year: int) -> TimeSeriesProfile:
    """Apply the growth multiplier for `year` to every sample."""
    factor = growth.demand_multiplier(year)
    return replace(profile, values=tuple(v * factor for v in profile.values))


@dataclass(frozen=True)
class EvFleetSpec:
    """Household EV fleet: two cars per household, unity power factor.

    Plug-in times are normally distributed around start_mean_step; each
    EV charges at charger_kw until daily_energy_kwh is delivered,
    wrapping past midnight.
    """

    penetration: float
    cars_per_household: int = 2
    charger_kw: float = 3.3
    daily_energy_kwh: float = 6.6
    start_mean_step: int = 74
    start_sd_steps: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.penetration <= 1.0:
            raise ValueError("penetration must be within [0, 1]")
        if self.charger_kw <= 0:
            raise ValueError("charger_kw must be positive")
        if self.daily_energy_kwh > self.charger_kw * 24.0:
            raise ValueError("daily energy exceeds what the charger can deliver in a day")

    def n_evs(self, n_households: int) -> int:
        return int(round(n_households * self.cars_per_household * self.penetration))


def build_household_ev_profile(
    fleet: EvFleetSpec, n_households: int, season: str = "winter"
) -> TimeSeriesProfile:
    """Aggregate household-EV demand in absolute kW, deterministic per seed."""
    if n_households < 0:
        raise ValueError("n_households must be non-negative")
    values = np.zeros(N_STEPS)
    n_evs = fleet.n_evs(n_households)
    if n_evs > 0:
        rng = np.random.default_rng(fleet.seed)
        starts = np.rint(rng.normal(fleet.start_mean_step, fleet.start_sd_steps, n_evs)).astype(int)
        starts %= N_STEPS
        duration_h = fleet.daily_energy_kwh / fleet.charger_kw
        full_steps = int(duration_h / STEP_HOURS)
        remainder = duration_h / STEP_HOURS - full_steps
        for k in range(full_steps):
            values += np.bincount((starts + k) % N_STEPS, minlength=N_STEPS) * fleet.charger_kw
        if remainder > 1e-12:
            values += (
                np.bincount((starts + full_steps) % N_STEPS, minlength=N_STEPS)
                * fleet.charger_kw
                * remainder
            )
    return TimeSeriesProfile(
        id=f"ev_household_p{fleet.penetration:.2f}_s{fleet.seed}",
        values=tuple(float(v) for v in values),
        season=season,
        klass="ev_household",
    )


# ---------------------------------------------------------------------------
# Built-in shape library
# ---------------------------------------------------------------------------

# (hour, per-unit value) nodes, linearly interpolated onto the 96 steps.
# The industrial plateau peaks mid-morning (shift-heavy industry with a
# night base load); households keep a flattened double hump whose evening
# peak is the only driver of the late system peak.
_SHAPE_TABLES: dict[tuple[str, str], tuple[tuple[float, float], ...]] = {
    ("mv_customer", "winter"): (
        (0.0, 0.395), (5.5, 0.395), (6.5, 0.60), (8.0, 0.88), (8.5, 0.93),
        (11.5, 0.93), (12.75, 0.87), (14.0, 0.885), (15.5, 0.87), (17.0, 0.76),
        (18.5, 0.30), (19.5, 0.195), (21.0, 0.19), (22.5, 0.35), (24.0, 0.395),
    ),
    ("mv_customer", "summer"): (
        (0.0, 0.30), (5.5, 0.30), (6.5, 0.47), (8.0, 0.70), (8.5, 0.74),
        (11.5, 0.74), (12.75, 0.69), (14.0, 0.70), (15.5, 0.69), (17.0, 0.60),
        (18.5, 0.23), (19.5, 0.15), (21.0, 0.15), (22.5, 0.26), (24.0, 0.29),
    ),
    ("lv_household", "winter"): (
        (0.0, 0.295), (1.5, 0.285), (4.5, 0.275), (6.0, 0.285), (7.5, 0.31),
        (9.0, 0.28), (12.0, 0.27), (14.0, 0.26), (16.0, 0.26), (17.5, 0.32),
        (19.0, 0.425), (19.75, 0.45), (20.75, 0.44), (22.0, 0.37),
        (23.25, 0.31), (24.0, 0.28),
    ),
    ("lv_household", "summer"): (
        (0.0, 0.23), (1.5, 0.22), (4.5, 0.21), (6.0, 0.22), (7.5, 0.24),
        (9.0, 0.22), (12.0, 0.21), (14.0, 0.20), (16.0, 0.20), (17.5, 0.24),
        (19.0, 0.31), (20.25, 0.34), (21.0, 0.33), (22.0, 0.29),
        (23.25, 0.24), (24.0, 0.22),
    ),
    ("pv", "winter"): (
        (0.0, 0.0), (7.75, 0.0), (9.0, 0.10), (10.5, 0.22), (12.0, 0.30),
        (13.5, 0.24), (15.0, 0.12), (16.5, 0.0), (24.0, 0.0),
    ),
    ("pv", "summer"): (
        (0.0, 0.0), (5.5, 0.0), (7.0, 0.25), (9.0, 0.55), (10.5, 0.75),
        (12.5, 0.85), (14.0, 0.78), (16.0, 0.55), (18.0, 0.25), (20.0, 0.02),
        (20.5, 0.0), (24.0, 0.0),
    ),
    ("rotating_dg", "winter"): ((0.0, 0.55), (24.0, 0.55)),
    ("rotating_dg", "summer"): ((0.0, 0.50), (24.0, 0.50)),
}


def _sample_shape(nodes) -> tuple[float, ...]:
    hours = [n[0] for n in nodes]
    values = [n[1] for n in nodes]
    steps = np.arange(N_STEPS) * STEP_HOURS
    return tuple(float(v) for v in np.interp(steps, hours, values))


class ProfileLibrary:
    """Profiles keyed by (family, season)."""

    def __init__(self, profiles: dict[tuple[str, str], TimeSeriesProfile]):
        self._profiles = dict(profiles)

    def get(self, family: str, season: str) -> TimeSeriesProfile:
        try:
            return self._profiles[(family, season)]
        except KeyError:
            raise KeyError(f"no profile for family {family!r}, season {season!r}") from None

    def families(self) -> set[str]:
        return {family for family, _ in self._profiles}

    def items(self):
        return self._profiles.items()


def default_library() -> ProfileLibrary:
    profiles = {}
    for (family, season), nodes in _SHAPE_TABLES.items():
        profiles[(family, season)] = TimeSeriesProfile(
            id=f"{family}_{season}",
            values=_sample_shape(nodes),
            season=season,
            klass=family,
        )
    return ProfileLibrary(profiles)


def write_profile_csv(profile: TimeSeriesProfile, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "value"])
        for step, value in enumerate(profile.values):
            writer.writerow([step, repr(value)])


def read_profile_csv(path, profile_id: str, season: str, klass: str) -> TimeSeriesProfile:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if len(rows) != N_STEPS:
        raise ValueError(f"{path}: expected {N_STEPS} rows, found {len(rows)}")
    values = [0.0] * N_STEPS
    for row in rows:
        values[int(row["step"])] = float(row["value"])
    return TimeSeriesProfile(id=profile_id, values=tuple(values), season=season, klass=klass)


# ---------------------------------------------------------------------------
# Injection composition
# ---------------------------------------------------------------------------


def _reactive(p_mw: float, power_factor: float) -> float:
    if power_factor >= 1.0:
        return 0.0
    return p_mw * math.tan(math.acos(power_factor))


def compose_bus_injections(
    grid: Grid,
    profiles: ProfileLibrary,
    year: int,
    season: str,
    step: int,
    growth: GrowthModel | None = None,
    demand_scale: float = 1.0,
    ev_household: TimeSeriesProfile | None = None,
    pr_profiles: dict[str, TimeSeriesProfile] | None = None,
) -> SnapshotInjections:
    """Net per-bus P/Q for one step.

    Demand (scaled by calibration factor and growth) minus embedded
    generation, plus the household-EV feed apportioned to LV aggregates
    by household count and any park-&-ride facility load at its
    connection bus.  EV terms contribute active power only.
    """
    if not 0 <= step < N_STEPS:
        raise ValueError(f"step must be in [0, {N_STEPS})")
    factor = demand_scale * (growth.demand_multiplier(year) if growth is not None else 1.0)

    p: dict[str, float] = {}
    q: dict[str, float] = {}

    def add(bus: str, p_mw: float, q_mvar: float):
        p[bus] = p.get(bus, 0.0) + p_mw
        q[bus] = q.get(bus, 0.0) + q_mvar

    total_households = grid.total_households()
    for load in grid.loads:
        shape = profiles.get(load.profile_ref, season)
        p_mw = load.installed_kw * shape.values[step] * factor / 1000.0
        add(load.bus, p_mw, _reactive(p_mw, load.power_factor))
        if ev_household is not None and load.klass == "lv_aggregate" and total_households:
            share = (load.n_households or 0) / total_households
            add(load.bus, ev_household.values[step] * share / 1000.0, 0.0)

    for gen in grid.generators:
        shape = profiles.get(gen.profile_ref, season)
        p_mw = gen.rated_kva * gen.power_factor * shape.values[step] / 1000.0
        add(gen.bus, -p_mw, -_reactive(p_mw, gen.power_factor))

    if pr_profiles:
        for bus_id, profile in pr_profiles.items():
            if not grid.has_bus(bus_id):
                raise KeyError(f"park-&-ride connection bus {bus_id!r} not in grid")
            add(bus_id, profile.values[step] / 1000.0, 0.0)

    return SnapshotInjections(p_mw=p, q_mvar=q)
