"""Benchmark the sweep kernels: compiled extension vs pure-Python fallback.

Runs a full simulated day (96 snapshots) of the reference grid through
both backends and reports per-snapshot and per-day timings.

    python benchmarks/bench_sweep.py [--repeats 5] [--seed 1]
"""

import argparse
import importlib
import time

import numpy as np

from gridsim_ev.powerflow import RadialNetwork
from gridsim_ev.powerflow import _sweep_py
from gridsim_ev.profiles import (
    EvFleetSpec,
    build_household_ev_profile,
    compose_bus_injections,
    default_library,
)
from gridsim_ev.synth import synthesize_reference_grid


def load_backends():
    backends = {"python": _sweep_py.run_sweep}
    try:
        cy = importlib.import_module("gridsim_ev.powerflow._sweep_cy")
        backends["cython"] = cy.run_sweep
    except ImportError:
        print("compiled kernel not available; benchmarking the fallback only")
    return backends


def build_day(seed):
    grid = synthesize_reference_grid(seed)
    net = RadialNetwork(grid)
    library = default_library()
    ev = build_household_ev_profile(EvFleetSpec(penetration=0.45, seed=101), 10_000)
    injections = [
        compose_bus_injections(
            grid, library, 2020, "winter", step, demand_scale=0.85, ev_household=ev
        )
        for step in range(96)
    ]
    vectors = [net.injection_vector(inj) for inj in injections]
    return net, vectors


def bench(run_sweep, net, vectors, repeats):
    best = float("inf")
    iterations = 0
    for _ in range(repeats):
        start = time.perf_counter()
        for s in vectors:
            _, _, iters, converged, _ = run_sweep(net.parent, net.z, s, 1.0 + 0j, 1e-6, 50)
            assert converged
            iterations += iters
        best = min(best, time.perf_counter() - start)
    return best, iterations / (repeats * len(vectors))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    net, vectors = build_day(args.seed)
    n = len(net.order)
    print(f"reference grid: {n} buses, {len(vectors)} snapshots, best of {args.repeats}\n")

    results = {}
    for name, fn in load_backends().items():
        day_s, mean_iters = bench(fn, net, vectors, args.repeats)
        results[name] = day_s
        print(
            f"{name:>7}: {day_s * 1000:8.1f} ms/day   "
            f"{day_s / len(vectors) * 1e6:8.1f} us/snapshot   "
            f"({mean_iters:.1f} sweep iterations avg)"
        )

    if len(results) == 2:
        speedup = results["python"] / results["cython"]
        print(f"\ncompiled kernel speedup: {speedup:.1f}x")

    # sanity: identical voltages from both backends on the first snapshot
    backends = load_backends()
    if len(backends) == 2:
        v_py = backends["python"](net.parent, net.z, vectors[0], 1.0 + 0j, 1e-10, 50)[0]
        v_cy = backends["cython"](net.parent, net.z, vectors[0], 1.0 + 0j, 1e-10, 50)[0]
        print(f"backend agreement: max |dV| = {np.abs(v_py - v_cy).max():.2e} pu")


if __name__ == "__main__":
    main()
