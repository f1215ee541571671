"""Balanced positive-sequence power flow on radial networks."""

from .kernel import BACKEND
from .network import RadialNetwork
from .solver import STEPS_PER_DAY, run_quasi_dynamic, solve_snapshot
from .types import SnapshotInjections, SnapshotSolution, SolutionSeries, SolveOptions

__all__ = [
    "BACKEND",
    "RadialNetwork",
    "STEPS_PER_DAY",
    "SnapshotInjections",
    "SnapshotSolution",
    "SolutionSeries",
    "SolveOptions",
    "run_quasi_dynamic",
    "solve_snapshot",
]
