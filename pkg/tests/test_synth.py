from collections import Counter

import pytest

from gridsim_ev.gridio import serialize_grid, validate_grid
from gridsim_ev.synth import (
    BRANCH_CENSUS,
    DISTRIBUTION_TRANSFORMER_CENSUS,
    GENERATOR_TRANSFORMER_CENSUS,
    MV_CUSTOMER_TOTAL_KW,
    N_HOUSEHOLDS,
    N_MV_CUSTOMERS,
    PR_CONNECTION_BUSES,
    synthesize_reference_grid,
)


@pytest.fixture(scope="module", params=[1, 7, 42])
def grid(request):
    return synthesize_reference_grid(request.param)


def test_validates_clean(grid):
    report = validate_grid(grid)
    assert report.ok, str(report)


def test_determinism_byte_identical():
    a = serialize_grid(synthesize_reference_grid(1))
    b = serialize_grid(synthesize_reference_grid(1))
    assert a == b


def test_seeds_differ():
    a = serialize_grid(synthesize_reference_grid(1))
    b = serialize_grid(synthesize_reference_grid(2))
    assert a != b


def test_distribution_transformer_census(grid):
    counts = Counter(
        int(t.rating_kva) for t in grid.transformers if t.role == "distribution"
    )
    assert counts == dict(DISTRIBUTION_TRANSFORMER_CENSUS)
    assert sum(counts.values()) == 138


def test_generator_transformer_census(grid):
    counts = Counter(
        int(t.rating_kva) for t in grid.transformers if t.role == "generator_stepup"
    )
    assert counts == dict(GENERATOR_TRANSFORMER_CENSUS)


def test_primary_transformer(grid):
    primary = grid.primary_transformer
    assert primary.rating_kva == 40_000.0
    assert primary.v1_kv == 132.0
    assert primary.v2_kv == 15.6


def test_branch_census_counts_and_lengths(grid):
    by_row = {}
    for br in grid.branches:
        if br.id == "MV0-TIE":
            continue
        key = int(br.cross_section_mm2)
        count, length = by_row.get(key, (0, 0.0))
        by_row[key] = (count + 1, length + br.length_km)
    assert len(grid.branches) == 178
    for size, materials, total_km, quantity in BRANCH_CENSUS:
        count, length = by_row[size]
        assert count == quantity, f"{size} mm2: {count} != {quantity}"
        assert length == pytest.approx(total_km, rel=1e-9)


def test_branch_materials_within_row(grid):
    allowed = {size: set(materials) for size, materials, _, _ in BRANCH_CENSUS}
    for br in grid.branches:
        if br.id == "MV0-TIE":
            continue
        assert br.material in allowed[int(br.cross_section_mm2)]


def test_seven_feeders_radial(grid):
    feeders = {}
    for bus in grid.buses:
        if bus.feeder_id:
            feeders.setdefault(bus.feeder_id, set()).add(bus.id)
    assert len(feeders) == 7
    for feeder_id, nodes in feeders.items():
        edges = sum(1 for _, u, v in grid.edges() if u in nodes and v in nodes)
        assert edges == len(nodes) - 1, f"feeder {feeder_id} is not a tree"


def test_mv_customer_total(grid):
    customers = [l for l in grid.loads if l.klass == "mv_customer"]
    assert len(customers) == N_MV_CUSTOMERS
    assert sum(l.installed_kw for l in customers) == pytest.approx(
        MV_CUSTOMER_TOTAL_KW, abs=1e-6
    )


def test_household_total(grid):
    assert grid.total_households() == N_HOUSEHOLDS


def test_generator_totals(grid):
    totals = {}
    counts = Counter()
    for g in grid.generators:
        totals[g.kind] = totals.get(g.kind, 0.0) + g.rated_kva
        counts[g.kind] += 1
    assert counts == {"SI": 3, "AS": 7, "ST": 11}
    assert totals["SI"] == pytest.approx(2842.0)
    assert totals["AS"] == pytest.approx(829.0)
    assert totals["ST"] == pytest.approx(4685.8)


def test_generator_power_factors(grid):
    for g in grid.generators:
        if g.kind == "ST":
            assert g.power_factor == 1.0
        else:
            assert g.power_factor in (0.8, 0.9)


def test_pr_connection_buses_exist(grid):
    feeders = set()
    for bus_id in PR_CONNECTION_BUSES:
        assert grid.has_bus(bus_id)
        feeders.add(grid.bus(bus_id).feeder_id)
    assert len(feeders) == 3
