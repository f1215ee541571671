import numpy as np
import pytest

from gridsim_ev.profiles import (
    N_STEPS,
    EvFleetSpec,
    GrowthModel,
    TimeSeriesProfile,
    build_household_ev_profile,
    compose_bus_injections,
    default_library,
    read_profile_csv,
    scale_for_year,
    write_profile_csv,
)


def flat_profile(value=0.5, klass="lv_household", season="winter"):
    return TimeSeriesProfile(
        id="flat", values=(value,) * N_STEPS, season=season, klass=klass
    )


# --- profile type -----------------------------------------------------------


def test_profile_length_enforced():
    with pytest.raises(ValueError, match="96"):
        TimeSeriesProfile(id="short", values=(0.1,) * 95, season="winter", klass="pv")


def test_profile_rejects_negative_samples():
    values = [0.1] * N_STEPS
    values[10] = -0.2
    with pytest.raises(ValueError, match="negative"):
        TimeSeriesProfile(id="neg", values=tuple(values), season="winter", klass="pv")


def test_default_library_complete():
    library = default_library()
    assert library.families() == {"mv_customer", "lv_household", "pv", "rotating_dg"}
    for family in library.families():
        for season in ("winter", "summer"):
            profile = library.get(family, season)
            assert len(profile.values) == N_STEPS
            assert max(profile.values) <= 1.0


def test_library_unknown_family():
    with pytest.raises(KeyError, match="no profile"):
        default_library().get("spaceship", "winter")


def test_pv_profiles_zero_at_night():
    library = default_library()
    for season in ("winter", "summer"):
        pv = library.get("pv", season)
        assert pv.values[0] == 0.0
        assert pv.values[95] == 0.0
        assert max(pv.values) > 0.2


# --- growth -----------------------------------------------------------------


def test_growth_identity_at_base_year():
    growth = GrowthModel(base_year=2020, customer_growth_per_year=0.013)
    assert growth.demand_multiplier(2020) == 1.0


def test_growth_compounding():
    growth = GrowthModel(base_year=2020, customer_growth_per_year=0.009)
    assert growth.demand_multiplier(2030) == pytest.approx(1.009**10)


def test_growth_overrides_take_precedence():
    growth = GrowthModel(
        base_year=2020,
        customer_growth_per_year=0.013,
        overrides={2023: 1.049, 2026: 1.078},
    )
    assert growth.demand_multiplier(2023) == 1.049
    assert growth.demand_multiplier(2026) == 1.078


def test_growth_rejects_past_years():
    growth = GrowthModel(base_year=2020)
    with pytest.raises(ValueError, match="precedes"):
        growth.demand_multiplier(2019)


def test_scale_for_year_identity():
    profile = flat_profile(0.5)
    growth = GrowthModel(base_year=2020, customer_growth_per_year=0.013)
    assert scale_for_year(profile, growth, 2020).values == profile.values


def test_scale_for_year_quoted_factors():
    profile = flat_profile(0.5)
    growth = GrowthModel(
        base_year=2020, customer_growth_per_year=0.013, overrides={2023: 1.049, 2026: 1.078}
    )
    assert scale_for_year(profile, growth, 2023).values[0] == pytest.approx(0.5245)
    assert scale_for_year(profile, growth, 2026).values[0] == pytest.approx(0.539)


def test_growth_monotone_scaling():
    profile = flat_profile(0.5)
    growth = GrowthModel(base_year=2020, customer_growth_per_year=0.013)
    previous = profile
    for year in (2021, 2024, 2030):
        scaled = scale_for_year(profile, growth, year)
        assert all(a >= b for a, b in zip(scaled.values, previous.values))
        previous = scaled


# --- household EV fleet -----------------------------------------------------


def test_fleet_validation():
    with pytest.raises(ValueError, match="penetration"):
        EvFleetSpec(penetration=1.2)
    with pytest.raises(ValueError, match="daily energy"):
        EvFleetSpec(penetration=0.5, charger_kw=1.0, daily_energy_kwh=30.0)


def test_zero_penetration_zero_profile():
    profile = build_household_ev_profile(EvFleetSpec(penetration=0.0), 10_000)
    assert set(profile.values) == {0.0}


def test_fleet_size():
    fleet = EvFleetSpec(penetration=0.35)
    assert fleet.n_evs(10_000) == 7_000


def test_ev_energy_bookkeeping():
    fleet = EvFleetSpec(penetration=0.35, seed=3)
    profile = build_household_ev_profile(fleet, 10_000)
    assert profile.energy_kwh() == pytest.approx(7_000 * 6.6, abs=1e-6)


def test_ev_energy_bookkeeping_partial_step():
    # 5.0 kWh at 3.3 kW is 6.06 steps: the last one is fractional
    fleet = EvFleetSpec(penetration=0.2, daily_energy_kwh=5.0, seed=3)
    profile = build_household_ev_profile(fleet, 10_000)
    assert profile.energy_kwh() == pytest.approx(4_000 * 5.0, abs=1e-6)


def test_ev_profile_deterministic_and_seed_sensitive():
    a = build_household_ev_profile(EvFleetSpec(penetration=0.35, seed=4), 10_000)
    b = build_household_ev_profile(EvFleetSpec(penetration=0.35, seed=4), 10_000)
    c = build_household_ev_profile(EvFleetSpec(penetration=0.35, seed=5), 10_000)
    assert a.values == b.values
    assert a.values != c.values


def test_ev_profile_pointwise_monotone_in_penetration():
    low = build_household_ev_profile(EvFleetSpec(penetration=0.11, seed=4), 10_000)
    high = build_household_ev_profile(EvFleetSpec(penetration=0.45, seed=4), 10_000)
    assert all(h >= l for l, h in zip(low.values, high.values))


def test_ev_profile_evening_concentration():
    profile = build_household_ev_profile(EvFleetSpec(penetration=0.45, seed=4), 10_000)
    values = np.asarray(profile.values)
    assert 72 <= values.argmax() <= 84  # evening plug-in wave


# --- CSV interchange --------------------------------------------------------


def test_profile_csv_roundtrip(tmp_path):
    library = default_library()
    original = library.get("lv_household", "winter")
    path = tmp_path / "lv_household_winter.csv"
    write_profile_csv(original, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "step,value"
    assert len(lines) == N_STEPS + 1
    loaded = read_profile_csv(path, original.id, "winter", "lv_household")
    assert loaded.values == original.values


def test_profile_csv_row_count_enforced(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("step,value\n0,0.5\n")
    with pytest.raises(ValueError, match="96"):
        read_profile_csv(path, "bad", "winter", "pv")


# --- injection composition --------------------------------------------------


def test_compose_zero_profiles_zero_injections(reference_grid):
    zero_library = default_library()
    zero = {
        key: TimeSeriesProfile(
            id=p.id, values=(0.0,) * N_STEPS, season=p.season, klass=p.klass
        )
        for key, p in zero_library.items()
    }
    from gridsim_ev.profiles import ProfileLibrary

    injections = compose_bus_injections(
        reference_grid, ProfileLibrary(zero), 2020, "winter", 40
    )
    assert all(abs(v) < 1e-12 for v in injections.p_mw.values())
    assert all(abs(v) < 1e-12 for v in injections.q_mvar.values())


def test_compose_apportions_ev_by_households(reference_grid):
    ev = build_household_ev_profile(EvFleetSpec(penetration=0.35, seed=3), 10_000)
    library = default_library()
    with_ev = compose_bus_injections(
        reference_grid, library, 2020, "winter", 78, ev_household=ev
    )
    without = compose_bus_injections(reference_grid, library, 2020, "winter", 78)
    total_households = reference_grid.total_households()
    deltas = {
        bus: with_ev.p_mw[bus] - without.p_mw.get(bus, 0.0) for bus in with_ev.p_mw
    }
    # conservation: apportioned EV power sums back to the fleet total
    assert sum(deltas.values()) * 1000.0 == pytest.approx(ev.values[78], rel=1e-9)
    # proportionality for one specific aggregate
    load = next(l for l in reference_grid.loads if l.klass == "lv_aggregate")
    share = load.n_households / total_households
    assert deltas[load.bus] * 1000.0 == pytest.approx(ev.values[78] * share, rel=1e-9)
    # EV adds no reactive power
    for bus, q in with_ev.q_mvar.items():
        assert q == pytest.approx(without.q_mvar.get(bus, 0.0), abs=1e-12)


def test_compose_applies_growth_and_scale_to_demand_only(reference_grid):
    library = default_library()
    growth = GrowthModel(base_year=2020, customer_growth_per_year=0.013)
    base = compose_bus_injections(reference_grid, library, 2020, "winter", 40)
    scaled = compose_bus_injections(
        reference_grid, library, 2025, "winter", 40, growth=growth, demand_scale=1.1
    )
    factor = 1.1 * 1.013**5
    gen_buses = {g.bus for g in reference_grid.generators}
    for bus, p in base.p_mw.items():
        if bus in gen_buses:
            continue  # generation is not scaled
        assert scaled.p_mw[bus] == pytest.approx(p * factor, rel=1e-9)
    for bus in gen_buses:
        if bus in base.p_mw and base.p_mw[bus] < 0:
            assert scaled.p_mw[bus] == pytest.approx(base.p_mw[bus], rel=1e-9)


def test_compose_pr_profile_at_connection_bus(reference_grid):
    library = default_library()
    pr = TimeSeriesProfile(
        id="pr", values=(1000.0,) * N_STEPS, season="winter", klass="pr_facility"
    )
    injections = compose_bus_injections(
        reference_grid, library, 2020, "winter", 40, pr_profiles={"F1-T06": pr}
    )
    base = compose_bus_injections(reference_grid, library, 2020, "winter", 40)
    assert injections.p_mw["F1-T06"] - base.p_mw.get("F1-T06", 0.0) == pytest.approx(1.0)
    assert injections.q_mvar.get("F1-T06", 0.0) == pytest.approx(
        base.q_mvar.get("F1-T06", 0.0)
    )


def test_compose_unknown_pr_bus(reference_grid):
    pr = TimeSeriesProfile(
        id="pr", values=(1000.0,) * N_STEPS, season="winter", klass="pr_facility"
    )
    with pytest.raises(KeyError, match="NOWHERE"):
        compose_bus_injections(
            reference_grid, default_library(), 2020, "winter", 40, pr_profiles={"NOWHERE": pr}
        )


def test_compose_season_changes_selection_only(reference_grid):
    library = default_library()
    winter = compose_bus_injections(reference_grid, library, 2020, "winter", 40)
    summer = compose_bus_injections(reference_grid, library, 2020, "summer", 40)
    assert set(winter.p_mw) == set(summer.p_mw)
    assert winter.p_mw != summer.p_mw
