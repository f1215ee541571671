"""Snapshot solve and the quasi-static daily driver."""

from __future__ import annotations

from collections.abc import Sequence

from ..errors import PowerFlowError
from ..model import Grid
from .network import RadialNetwork
from .types import SnapshotInjections, SnapshotSolution, SolutionSeries, SolveOptions

STEPS_PER_DAY = 96


def solve_snapshot(
    grid: Grid,
    injections: SnapshotInjections,
    options: SolveOptions | None = None,
) -> SnapshotSolution:
    """Solve one steady-state snapshot.

    Non-convergence is reported through the returned solution's
    ``converged`` flag; structural problems (cycles, islands, unknown
    buses) raise PowerFlowError.
    """
    return RadialNetwork(grid).solve(injections, options or SolveOptions())


def run_quasi_dynamic(
    grid: Grid,
    series: Sequence[SnapshotInjections],
    options: SolveOptions | None = None,
    network: RadialNetwork | None = None,
) -> SolutionSeries:
    """Solve 96 independent snapshots, one per 15-minute step.

    Steps share no state; a non-converged step raises PowerFlowError
    tagged with its index.  Pass a prebuilt RadialNetwork to amortize
    topology work across scenario runs.
    """
    if len(series) != STEPS_PER_DAY:
        raise ValueError(f"expected {STEPS_PER_DAY} snapshots, got {len(series)}")
    net = network if network is not None else RadialNetwork(grid)
    opts = options or SolveOptions()
    solutions = []
    for step, injections in enumerate(series):
        solution = net.solve(injections, opts)
        if not solution.converged:
            raise PowerFlowError(
                f"power flow did not converge within {opts.max_iterations} iterations "
                f"(mismatch {solution.max_mismatch_pu:.3e} pu)",
                step=step,
            )
        solutions.append(solution)
    return SolutionSeries(solutions=tuple(solutions))
