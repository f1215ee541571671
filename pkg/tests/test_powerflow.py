import math

import numpy as np
import pytest

from gridsim_ev.errors import PowerFlowError
from gridsim_ev.model import Branch, Bus, Grid, LoadPoint
from gridsim_ev.powerflow import (
    RadialNetwork,
    SnapshotInjections,
    SolveOptions,
    run_quasi_dynamic,
    solve_snapshot,
)
from gridsim_ev.powerflow._sweep_py import run_sweep as run_sweep_py
from gridsim_ev.powerflow import kernel

from oracles import gauss_seidel_voltages
from test_model import make_two_bus_grid


def two_bus_closed_form(r_ohm, x_ohm, p_mw, q_mvar, kv, base_mva):
    """|V| at the receiving end from the exact branch-flow quadratic.

    With sending voltage 1 pu and the full load S = P + jQ at the far
    end of impedance Z = R + jX, v = |V|^2 solves
    v^2 + (2(RP + XQ) - 1) v + (R^2 + X^2)(P^2 + Q^2) = 0.
    """
    z_base = kv * kv / base_mva
    r, x = r_ohm / z_base, x_ohm / z_base
    p, q = p_mw / base_mva, q_mvar / base_mva
    b = 2.0 * (r * p + x * q) - 1.0
    c = (r * r + x * x) * (p * p + q * q)
    v2 = (-b + math.sqrt(b * b - 4.0 * c)) / 2.0
    return math.sqrt(v2)


def test_no_load_network_flat():
    grid = make_two_bus_grid()
    solution = solve_snapshot(grid, SnapshotInjections())
    assert solution.converged
    assert solution.v_magnitude_pu["A"] == 1.0
    assert solution.v_angle_rad["A"] == 0.0
    assert solution.v_magnitude_pu["B"] == pytest.approx(1.0, abs=1e-15)
    assert solution.branch_current_a["L1"] == pytest.approx(0.0, abs=1e-12)
    assert solution.losses_mw == pytest.approx(0.0, abs=1e-12)


def test_two_bus_closed_form_oracle():
    grid = make_two_bus_grid()  # R = 0.2 ohm, X = 0.1 ohm, 15 kV, 1 MVA base
    injections = SnapshotInjections(p_mw={"B": 1.0})
    solution = solve_snapshot(
        grid, injections, SolveOptions(tolerance_pu=1e-13, max_iterations=100)
    )
    expected = two_bus_closed_form(0.2, 0.1, 1.0, 0.0, kv=15.0, base_mva=1.0)
    assert solution.converged
    assert solution.v_magnitude_pu["B"] == pytest.approx(expected, abs=1e-9)


def test_two_bus_with_reactive_load():
    grid = make_two_bus_grid()
    injections = SnapshotInjections(p_mw={"B": 0.8}, q_mvar={"B": 0.35})
    solution = solve_snapshot(
        grid, injections, SolveOptions(tolerance_pu=1e-13, max_iterations=100)
    )
    expected = two_bus_closed_form(0.2, 0.1, 0.8, 0.35, kv=15.0, base_mva=1.0)
    assert solution.v_magnitude_pu["B"] == pytest.approx(expected, abs=1e-9)


def random_radial_grid(rng, max_buses=10):
    """Seeded random radial 15 kV grid with moderate loading."""
    n = int(rng.integers(2, max_buses + 1))
    buses = [Bus(id="N0", nominal_kv=15.0, kind="slack")]
    branches = []
    loads = []
    for i in range(1, n):
        parent = int(rng.integers(0, i))
        buses.append(Bus(id=f"N{i}", nominal_kv=15.0))
        branches.append(
            Branch(
                id=f"E{i}",
                from_bus=f"N{parent}",
                to_bus=f"N{i}",
                length_km=float(rng.uniform(0.2, 3.0)),
                cross_section_mm2=150.0,
                material="AL",
                r_ohm_per_km=float(rng.uniform(0.1, 0.6)),
                x_ohm_per_km=float(rng.uniform(0.05, 0.4)),
                ampacity_a=320.0,
            )
        )
        if rng.random() < 0.8:
            loads.append(
                LoadPoint(
                    id=f"LD{i}",
                    bus=f"N{i}",
                    klass="mv_customer",
                    installed_kw=float(rng.uniform(100.0, 2500.0)),
                    power_factor=float(rng.uniform(0.85, 1.0)),
                    profile_ref="mv_customer",
                )
            )
    grid = Grid(
        name="random",
        base_mva=10.0,
        buses=tuple(buses),
        branches=tuple(branches),
        transformers=(),
        generators=(),
        loads=tuple(loads),
    )
    injections = SnapshotInjections(
        p_mw={l.bus: l.installed_kw / 1000.0 for l in loads},
        q_mvar={
            l.bus: l.installed_kw / 1000.0 * math.tan(math.acos(l.power_factor))
            for l in loads
        },
    )
    return grid, injections


def test_fixed_point_oracle_equivalence():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        grid, injections = random_radial_grid(rng)
        solution = solve_snapshot(
            grid, injections, SolveOptions(tolerance_pu=1e-12, max_iterations=200)
        )
        assert solution.converged
        reference = gauss_seidel_voltages(grid, injections)
        for bus_id, v_ref in reference.items():
            assert solution.v_magnitude_pu[bus_id] == pytest.approx(
                abs(v_ref), abs=1e-6
            )


def test_power_balance_and_losses(reference_grid):
    from gridsim_ev.profiles import (
        EvFleetSpec,
        build_household_ev_profile,
        compose_bus_injections,
        default_library,
    )

    library = default_library()
    ev = build_household_ev_profile(EvFleetSpec(penetration=0.35, seed=9), 10_000)
    options = SolveOptions()
    net = RadialNetwork(reference_grid)
    for step in (10, 40, 78):
        injections = compose_bus_injections(
            reference_grid, library, 2020, "winter", step, ev_household=ev
        )
        solution = net.solve(injections, options)
        assert solution.converged
        net_load = sum(injections.p_mw.values())
        residual = solution.slack_p_mw - net_load - solution.losses_mw
        assert abs(residual) < 10 * options.tolerance_pu * reference_grid.base_mva
        assert solution.losses_mw >= 0.0


def test_voltage_monotone_in_load():
    grid = make_two_bus_grid()
    v_prev = 1.0
    for p in (0.2, 0.5, 1.0, 1.5, 2.0):
        solution = solve_snapshot(grid, SnapshotInjections(p_mw={"B": p}))
        v = solution.v_magnitude_pu["B"]
        assert v < v_prev
        v_prev = v


def test_non_convergence_flagged_not_raised():
    grid = make_two_bus_grid()
    # far beyond maximum power transfer of the branch
    solution = solve_snapshot(grid, SnapshotInjections(p_mw={"B": 500.0}))
    assert not solution.converged


def test_unknown_injection_bus_rejected():
    grid = make_two_bus_grid()
    with pytest.raises(PowerFlowError, match="unknown bus"):
        solve_snapshot(grid, SnapshotInjections(p_mw={"NOPE": 1.0}))


def test_slack_injection_rejected():
    grid = make_two_bus_grid()
    with pytest.raises(PowerFlowError, match="slack"):
        solve_snapshot(grid, SnapshotInjections(p_mw={"A": 1.0}))


def test_cycle_rejected():
    base = make_two_bus_grid()
    extra = Branch(
        id="L2",
        from_bus="A",
        to_bus="B",
        length_km=1.0,
        cross_section_mm2=150.0,
        material="AL",
        r_ohm_per_km=0.2,
        x_ohm_per_km=0.1,
        ampacity_a=320.0,
    )
    grid = Grid(
        name="meshed",
        base_mva=1.0,
        buses=base.buses,
        branches=base.branches + (extra,),
        transformers=(),
        generators=(),
        loads=(),
    )
    with pytest.raises(PowerFlowError, match="not radial"):
        RadialNetwork(grid)


def test_isolated_bus_rejected():
    base = make_two_bus_grid()
    grid = Grid(
        name="island",
        base_mva=1.0,
        buses=base.buses + (Bus(id="C", nominal_kv=15.0),),
        branches=base.branches,
        transformers=(),
        generators=(),
        loads=(),
    )
    with pytest.raises(PowerFlowError, match="singular"):
        RadialNetwork(grid)


def test_quasi_dynamic_time_invariance():
    grid = make_two_bus_grid()
    injections = SnapshotInjections(p_mw={"B": 0.7})
    series = run_quasi_dynamic(grid, [injections] * 96)
    assert len(series) == 96
    v = {s.v_magnitude_pu["B"] for s in series}
    assert len(v) == 1


def test_quasi_dynamic_zero_injections():
    grid = make_two_bus_grid()
    series = run_quasi_dynamic(grid, [SnapshotInjections()] * 96)
    assert all(s.v_magnitude_pu["B"] == pytest.approx(1.0, abs=1e-15) for s in series)


def test_quasi_dynamic_requires_96_steps():
    grid = make_two_bus_grid()
    with pytest.raises(ValueError, match="96"):
        run_quasi_dynamic(grid, [SnapshotInjections()] * 24)


def test_quasi_dynamic_tags_failing_step():
    grid = make_two_bus_grid()
    steps = [SnapshotInjections() for _ in range(96)]
    steps[37] = SnapshotInjections(p_mw={"B": 500.0})
    with pytest.raises(PowerFlowError, match="step 37"):
        run_quasi_dynamic(grid, steps)


def test_kernel_backends_agree():
    rng = np.random.default_rng(55)
    grid, injections = random_radial_grid(rng)
    net = RadialNetwork(grid)
    s = net.injection_vector(injections)
    v_active, cur_active, _, conv_a, _ = kernel.run_sweep(
        net.parent, net.z, s, 1.0 + 0j, 1e-12, 100
    )
    v_py, cur_py, _, conv_b, _ = run_sweep_py(net.parent, net.z, s, 1.0 + 0j, 1e-12, 100)
    assert conv_a and conv_b
    assert np.allclose(v_active, v_py, atol=1e-12)
    assert np.allclose(cur_active, cur_py, atol=1e-12)


def test_transformer_loading_on_hv_side(reference_grid):
    from gridsim_ev.profiles import compose_bus_injections, default_library

    injections = compose_bus_injections(
        reference_grid, default_library(), 2020, "winter", 40
    )
    solution = solve_snapshot(reference_grid, injections)
    primary = reference_grid.primary_transformer
    loading = solution.transformer_loading_percent[primary.id]
    s_kva = solution.transformer_s_kva[primary.id]
    assert loading == pytest.approx(s_kva / primary.rating_kva * 100.0)
    assert 0.0 < loading < 100.0
