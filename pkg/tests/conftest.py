import time

import pytest

from gridsim_ev import synthesize_reference_grid
from gridsim_ev.scenarios import calibrate_baseline, load_catalog, run_cases

GRID_SEED = 1


@pytest.fixture(scope="session")
def reference_grid():
    return synthesize_reference_grid(GRID_SEED)


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def demand_scale(reference_grid, catalog):
    return calibrate_baseline(reference_grid, catalog=catalog)


@pytest.fixture(scope="session")
def case_results(reference_grid, catalog, demand_scale):
    """All catalog scenarios, run once; also records per-case wall time."""
    timings = {}
    results = {}
    for case in ("I", "II", "III", "IV"):
        specs = [s for s in catalog if s.case == case]
        start = time.perf_counter()
        results.update(run_cases(reference_grid, specs, demand_scale))
        timings[case] = time.perf_counter() - start
    results["__timings__"] = timings
    return results
