"""Park-&-ride charging sessions and schedule optimization.

Two schedulers are provided: the plug-and-charge baseline (every EV
draws full power from arrival until its energy is met, no facility cap)
and the min-peak schedule.  The min-peak problem is a linear program
over the per-session per-step power matrix:

    minimize  C
    s.t.      sum_t p[i][t] * 0.25 h = energy_i      (per session)
              sum_i p[i][t] <= C                     (per step)
              0 <= p[i][t] <= p_max_i, zero outside the session window

A second stage pins the optimal peak and minimizes the total energy
above the day-mean level, which flattens the facility profile among
equal-peak optima and makes the output deterministic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import ScheduleError

N_STEPS = 96
STEP_HOURS = 0.25
_TOL_KWH = 1e-6


@dataclass(frozen=True)
class FacilitySpec:
    """One park-&-ride facility: every lot carries an identical charger."""

    id: str
    connection_bus: str
    n_chargers: int = 1000
    charger_kw: float = 3.3
    nominal_power_kw: float | None = None

    def __post_init__(self):
        if self.n_chargers <= 0 or self.charger_kw <= 0:
            raise ValueError("facility sizes must be positive")
        if self.nominal_power_kw is None:
            # default cap: 60 % of the plated charger capacity
            object.__setattr__(self, "nominal_power_kw", 0.6 * self.n_chargers * self.charger_kw)
        if self.nominal_power_kw > self.n_chargers * self.charger_kw:
            raise ValueError("nominal power cannot exceed total charger capacity")


@dataclass(frozen=True)
class ChargingSession:
    """One EV's stay: window [arrival_step, departure_step), energy need, rate cap."""

    ev_id: str
    arrival_step: int
    departure_step: int
    energy_kwh: float
    p_max_kw: float

    def __post_init__(self):
        if not 0 <= self.arrival_step < self.departure_step <= N_STEPS - 1:
            raise ValueError(
                f"session {self.ev_id!r}: need 0 <= arrival < departure <= {N_STEPS - 1}"
            )
        if self.energy_kwh < 0 or self.p_max_kw <= 0:
            raise ValueError(f"session {self.ev_id!r}: bad energy or power cap")
        if self.energy_kwh > self.max_energy_kwh() + _TOL_KWH:
            raise ValueError(
                f"session {self.ev_id!r}: energy {self.energy_kwh} kWh exceeds "
                f"window capacity {self.max_energy_kwh():.3f} kWh"
            )

    def window_steps(self) -> range:
        return range(self.arrival_step, self.departure_step)

    def max_energy_kwh(self) -> float:
        return self.p_max_kw * (self.departure_step - self.arrival_step) * STEP_HOURS


@dataclass(frozen=True)
class ScheduleResult:
    """Power matrix (kW per session per step) plus the aggregate profile."""

    ev_ids: tuple[str, ...]
    power_kw: np.ndarray  # shape (n_sessions, 96)
    facility_profile_kw: tuple[float, ...]
    peak_kw: float
    feasible: bool
    optimized: bool


def generate_sessions(facility: FacilitySpec, occupancy: float, seed: int) -> list[ChargingSession]:
    """Seeded commuter sessions: morning arrivals, evening departures.

    round(occupancy * n_chargers) sessions; each satisfies the window
    feasibility invariant by construction.
    """
    if not 0.0 <= occupancy <= 1.0:
        raise ValueError("occupancy must be within [0, 1]")
    n = int(round(occupancy * facility.n_chargers))
    rng = np.random.default_rng(seed)
    sessions = []
    for i in range(n):
        arrival = int(np.clip(round(rng.normal(32.0, 1.6)), 26, 40))  # ~08:00
        departure = int(np.clip(round(rng.normal(66.0, 3.0)), arrival + 8, 72))  # ~16:30
        window_kwh = facility.charger_kw * (departure - arrival) * STEP_HOURS
        energy = float(np.clip(rng.normal(7.0, 1.2), 1.5, min(9.9, window_kwh)))
        sessions.append(
            ChargingSession(
                ev_id=f"{facility.id}-EV{i + 1:04d}",
                arrival_step=arrival,
                departure_step=departure,
                energy_kwh=energy,
                p_max_kw=facility.charger_kw,
            )
        )
    return sessions


def _result_from_matrix(sessions, matrix, optimized, nominal_power_kw) -> ScheduleResult:
    profile = matrix.sum(axis=0) if len(sessions) else np.zeros(N_STEPS)
    peak = float(profile.max()) if len(sessions) else 0.0
    feasible = peak <= (nominal_power_kw or np.inf) + 1e-6
    return ScheduleResult(
        ev_ids=tuple(s.ev_id for s in sessions),
        power_kw=matrix,
        facility_profile_kw=tuple(float(v) for v in profile),
        peak_kw=peak,
        feasible=bool(feasible),
        optimized=optimized,
    )


def schedule_unoptimized(
    sessions: list[ChargingSession], facility: FacilitySpec | None = None
) -> ScheduleResult:
    """Plug-and-charge baseline: full rate from arrival until done."""
    matrix = np.zeros((len(sessions), N_STEPS))
    for i, s in enumerate(sessions):
        remaining = s.energy_kwh
        for t in s.window_steps():
            if remaining <= _TOL_KWH:
                break
            delivered = min(s.p_max_kw * STEP_HOURS, remaining)
            matrix[i, t] = delivered / STEP_HOURS
            remaining -= delivered
    return _result_from_matrix(
        matrix=matrix,
        sessions=sessions,
        optimized=False,
        nominal_power_kw=facility.nominal_power_kw if facility else None,
    )


def _window_variables(sessions):
    """Sparse variable layout: one LP variable per (session, window step)."""
    var_session = []
    var_step = []
    for i, s in enumerate(sessions):
        for t in s.window_steps():
            var_session.append(i)
            var_step.append(t)
    return np.asarray(var_session), np.asarray(var_step)


def schedule_min_peak(sessions: list[ChargingSession], facility: FacilitySpec) -> ScheduleResult:
    """Minimize the facility peak; flatten the profile among equal-peak optima.

    If even the optimal peak exceeds the facility's nominal power the
    schedule is still returned with feasible=False.
    """
    if not sessions:
        return _result_from_matrix(
            sessions, np.zeros((0, N_STEPS)), optimized=True, nominal_power_kw=facility.nominal_power_kw
        )

    var_session, var_step = _window_variables(sessions)
    n_vars = len(var_session)
    n_sessions = len(sessions)
    energies = np.array([s.energy_kwh for s in sessions])
    p_max = np.array([sessions[i].p_max_kw for i in var_session])
    occupied = np.unique(var_step)
    step_row = {t: r for r, t in enumerate(occupied)}
    rows_step = np.array([step_row[t] for t in var_step])

    # per-session energy balance: 0.25 * sum(p) == energy
    a_eq = sparse.csr_matrix(
        (np.full(n_vars, STEP_HOURS), (var_session, np.arange(n_vars))),
        shape=(n_sessions, n_vars),
    )
    # per-step aggregation matrix
    a_step = sparse.csr_matrix(
        (np.ones(n_vars), (rows_step, np.arange(n_vars))), shape=(len(occupied), n_vars)
    )

    # stage 1: minimize the peak C
    a_ub1 = sparse.hstack([a_step, sparse.csr_matrix(-np.ones((len(occupied), 1)))], format="csr")
    c1 = np.zeros(n_vars + 1)
    c1[-1] = 1.0
    res1 = linprog(
        c1,
        A_ub=a_ub1,
        b_ub=np.zeros(len(occupied)),
        A_eq=sparse.hstack([a_eq, sparse.csr_matrix((n_sessions, 1))], format="csr"),
        b_eq=energies,
        bounds=[(0.0, float(pm)) for pm in p_max] + [(0.0, None)],
        method="highs-ipm",
    )
    if not res1.success:
        raise ScheduleError(f"min-peak optimization failed: {res1.message}")
    peak_opt = float(res1.x[-1])

    # stage 2: fix the peak, minimize total energy above the day-mean level
    # (flattest equal-peak profile)
    cap = peak_opt + max(1e-6, 1e-9 * peak_opt)
    mean_level = energies.sum() / (STEP_HOURS * N_STEPS)
    n_u = len(occupied)
    a_ub2 = sparse.vstack(
        [
            # sum_i p[i][t] - u_t <= mean_level
            sparse.hstack([a_step, -sparse.identity(n_u, format="csr")]),
            # sum_i p[i][t] <= cap
            sparse.hstack([a_step, sparse.csr_matrix((n_u, n_u))]),
        ],
        format="csr",
    )
    b_ub2 = np.concatenate([np.full(n_u, mean_level), np.full(n_u, cap)])
    c2 = np.concatenate([np.zeros(n_vars), np.ones(n_u)])
    res2 = linprog(
        c2,
        A_ub=a_ub2,
        b_ub=b_ub2,
        A_eq=sparse.hstack([a_eq, sparse.csr_matrix((n_sessions, n_u))], format="csr"),
        b_eq=energies,
        bounds=[(0.0, float(pm)) for pm in p_max] + [(0.0, None)] * n_u,
        method="highs-ipm",
    )
    if not res2.success:
        raise ScheduleError(f"profile flattening failed: {res2.message}")

    matrix = np.zeros((n_sessions, N_STEPS))
    matrix[var_session, var_step] = np.maximum(res2.x[:n_vars], 0.0)
    return _result_from_matrix(
        sessions, matrix, optimized=True, nominal_power_kw=facility.nominal_power_kw
    )


@dataclass(frozen=True)
class ScheduleVerification:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "schedule valid: no violations"
        return "\n".join(f"- {v}" for v in self.violations)


def verify_schedule(
    sessions: list[ChargingSession],
    result: ScheduleResult,
    facility: FacilitySpec,
    tol_kw: float = 1e-6,
) -> ScheduleVerification:
    """Check every schedule invariant; violations become report entries."""
    violations = []
    matrix = np.asarray(result.power_kw, dtype=float)
    if matrix.shape != (len(sessions), N_STEPS):
        return ScheduleVerification(
            (f"matrix shape {matrix.shape} does not match {len(sessions)} sessions x {N_STEPS} steps",)
        )

    for i, s in enumerate(sessions):
        row = matrix[i]
        if row.min() < -tol_kw:
            violations.append(f"session {s.ev_id}: negative power {row.min():.6f} kW")
        if row.max() > s.p_max_kw + tol_kw:
            violations.append(
                f"session {s.ev_id}: power {row.max():.6f} kW exceeds cap {s.p_max_kw} kW"
            )
        outside = np.concatenate([row[: s.arrival_step], row[s.departure_step :]])
        if outside.size and np.abs(outside).max() > tol_kw:
            violations.append(f"session {s.ev_id}: power drawn outside [arrival, departure)")
        delivered = row.sum() * STEP_HOURS
        if abs(delivered - s.energy_kwh) > _TOL_KWH:
            violations.append(
                f"session {s.ev_id}: delivered {delivered:.6f} kWh, needs {s.energy_kwh:.6f} kWh"
            )

    profile = matrix.sum(axis=0) if len(sessions) else np.zeros(N_STEPS)
    if np.abs(profile - np.asarray(result.facility_profile_kw)).max() > tol_kw:
        violations.append("facility_profile_kw inconsistent with the power matrix")
    peak = float(profile.max()) if len(sessions) else 0.0
    if abs(peak - result.peak_kw) > tol_kw:
        violations.append(f"peak_kw {result.peak_kw:.6f} inconsistent with matrix peak {peak:.6f}")
    if result.optimized and result.feasible and peak > facility.nominal_power_kw + tol_kw:
        violations.append(
            f"facility peak {peak:.3f} kW exceeds nominal power {facility.nominal_power_kw} kW"
        )
    return ScheduleVerification(tuple(violations))


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------


def write_sessions_csv(sessions: list[ChargingSession], path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ev_id", "arrival_step", "departure_step", "energy_kwh", "p_max_kw"])
        for s in sessions:
            writer.writerow([s.ev_id, s.arrival_step, s.departure_step, repr(s.energy_kwh), repr(s.p_max_kw)])


def read_sessions_csv(path) -> list[ChargingSession]:
    sessions = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            sessions.append(
                ChargingSession(
                    ev_id=row["ev_id"],
                    arrival_step=int(row["arrival_step"]),
                    departure_step=int(row["departure_step"]),
                    energy_kwh=float(row["energy_kwh"]),
                    p_max_kw=float(row["p_max_kw"]),
                )
            )
    return sessions


def write_schedule_csv(result: ScheduleResult, path, summary_path=None):
    """Matrix CSV (one row per session, 96 power columns) plus a summary line."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ev_id"] + [f"t{t}" for t in range(N_STEPS)])
        for ev_id, row in zip(result.ev_ids, np.asarray(result.power_kw)):
            writer.writerow([ev_id] + [repr(float(v)) for v in row])
    if summary_path is not None:
        with open(summary_path, "w", newline="") as fh:
            fh.write("peak_kw,feasible\n")
            fh.write(f"{result.peak_kw!r},{str(result.feasible).lower()}\n")
