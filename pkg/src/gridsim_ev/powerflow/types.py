"""Value types passed into and out of the power-flow solver."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class SolveOptions:
    tolerance_pu: float = 1e-6
    max_iterations: int = 50

    def __post_init__(self):
        if self.tolerance_pu <= 0:
            raise ValueError("tolerance_pu must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class SnapshotInjections:
    """Net per-bus power for one time step.

    Consumption is positive, generation negative, in MW / Mvar.  Buses
    without an entry default to zero; the slack bus must not be keyed.
    """

    p_mw: dict[str, float] = field(default_factory=dict)
    q_mvar: dict[str, float] = field(default_factory=dict)

    def buses(self):
        return set(self.p_mw) | set(self.q_mvar)


@dataclass(frozen=True)
class SnapshotSolution:
    """Solved state of one snapshot.

    Voltages are per-unit magnitudes and radian angles per bus; branch
    results carry current in A and loading as % of ampacity; transformer
    results carry HV-side apparent power in kVA, loading as % of rating
    and HV-side active power in MW.
    """

    v_magnitude_pu: dict[str, float]
    v_angle_rad: dict[str, float]
    branch_current_a: dict[str, float]
    branch_loading_percent: dict[str, float]
    transformer_s_kva: dict[str, float]
    transformer_loading_percent: dict[str, float]
    transformer_p_hv_mw: dict[str, float]
    losses_mw: float
    slack_p_mw: float
    slack_q_mvar: float
    converged: bool
    iterations: int
    max_mismatch_pu: float


@dataclass(frozen=True)
class SolutionSeries:
    """One solved day: 96 snapshots at 15-minute resolution."""

    solutions: tuple[SnapshotSolution, ...]
    step_minutes: int = 15

    def __post_init__(self):
        if len(self.solutions) != 96:
            raise ValueError(f"expected 96 snapshots, got {len(self.solutions)}")

    def __iter__(self):
        return iter(self.solutions)

    def __len__(self):
        return len(self.solutions)

    def __getitem__(self, idx):
        return self.solutions[idx]

    def transformer_loading_series(self, transformer_id: str) -> list[float]:
        return [s.transformer_loading_percent[transformer_id] for s in self.solutions]

    def transformer_p_series_mw(self, transformer_id: str) -> list[float]:
        return [s.transformer_p_hv_mw[transformer_id] for s in self.solutions]
