"""Deterministic synthesis of the reference MV distribution grid.

The synthesized network mirrors the study grid inventory: one 40 MVA
132/15.6 kV primary transformer feeding a two-section 15 kV busbar,
7 MV feeders, 178 branches, 138 secondary substations (15/0.4 kV),
38 MV customers totaling 27.7 MW, 21 embedded generators with their
step-up transformers, and 10,000 LV households aggregated per
secondary substation.

Census tables below are the single source of truth; the test suite
asserts synthesized grids against them.  Seeded randomness controls
segment lengths, spur attachment points, and size splits, never the
census itself.
"""

from __future__ import annotations

import numpy as np

from .model import Branch, Bus, Generator, Grid, LoadPoint, Transformer

# (rating_kva, quantity) of 15/0.4 kV secondary-substation transformers
DISTRIBUTION_TRANSFORMER_CENSUS = (
    (630, 7),
    (400, 56),
    (250, 52),
    (160, 12),
    (100, 9),
    (63, 2),
)

# (rating_kva, quantity) of 0.4/15 kV generator step-up transformers
GENERATOR_TRANSFORMER_CENSUS = (
    (2000, 1),
    (1600, 4),
    (1250, 1),
    (1000, 3),
    (800, 2),
    (630, 4),
    (600, 1),
    (500, 3),
    (400, 2),
)

# (cross_section_mm2, materials, total_length_km, quantity) per line class;
# rows with two materials are split between them during synthesis.
BRANCH_CENSUS = (
    (240, ("AL",), 18.7, 49),
    (185, ("AL",), 16.8, 39),
    (150, ("AL", "CU"), 20.1, 47),
    (100, ("CU",), 0.337, 2),
    (95, ("CU",), 4.67, 19),
    (70, ("CU",), 0.16, 1),
    (63, ("CU",), 0.44, 2),
    (54, ("AC",), 3.34, 2),
    (40, ("CU",), 0.72, 4),
    (35, ("AL",), 2.16, 6),
    (25, ("CU",), 1.15, 5),
    (20, ("CU",), 0.07, 1),
)

# (kind, power_factor, unit ratings in kVA); totals 2842 / 829 / 4685.8
GENERATOR_UNITS = (
    ("SI", 0.9, (1242.0, 900.0, 700.0)),
    ("AS", 0.8, (150.0, 140.0, 130.0, 120.0, 110.0, 100.0, 79.0)),
    ("ST", 1.0, (650.0, 600.0, 550.0, 500.0, 450.0, 420.0, 400.0, 350.0, 300.0, 250.0, 215.8)),
)

N_MV_CUSTOMERS = 38
MV_CUSTOMER_TOTAL_KW = 27_700.0
N_HOUSEHOLDS = 10_000
HOUSEHOLD_INSTALLED_KW = 3.0

PRIMARY_RATING_KVA = 40_000.0
PRIMARY_UK_PERCENT = 12.5
PRIMARY_LOAD_LOSS_KW = 200.0  # 0.5 % of rating
DISTRIBUTION_UK_PERCENT = 4.0
DISTRIBUTION_LOAD_LOSS_FRACTION = 0.011
STEPUP_UK_PERCENT = 6.0
STEPUP_LOAD_LOSS_FRACTION = 0.010

MV_CUSTOMER_POWER_FACTOR = 0.92
LV_AGGREGATE_POWER_FACTOR = 0.95

# Ohm*mm^2/m resistivity per conductor material
RESISTIVITY = {"AL": 0.0282, "AC": 0.0325, "CU": 0.0178}

# Sizes >= 95 mm2 are underground cable, smaller ones overhead line
X_UNDERGROUND_OHM_PER_KM = 0.11
X_OVERHEAD_OHM_PER_KM = 0.35

AMPACITY_A = {
    (400, "CU"): 600.0,
    (240, "AL"): 420.0,
    (185, "AL"): 360.0,
    (150, "AL"): 320.0,
    (150, "CU"): 400.0,
    (100, "CU"): 310.0,
    (95, "CU"): 300.0,
    (70, "CU"): 250.0,
    (63, "CU"): 230.0,
    (54, "AC"): 190.0,
    (40, "CU"): 170.0,
    (35, "AL"): 140.0,
    (25, "CU"): 125.0,
    (20, "CU"): 110.0,
}

FEEDERS = ("F1", "F2", "F3", "F4", "F5", "F6", "F7")

# Busbar section each feeder hangs off (the two sections are joined by a tie)
FEEDER_SECTION = {"F1": "A", "F2": "A", "F3": "A", "F4": "A", "F5": "B", "F6": "B", "F7": "B"}

# Trunk segment counts drawing from the 240 AL (F1-F4) and 185 AL (F5-F7) rows
TRUNK_SEGMENTS = {"F1": 13, "F2": 12, "F3": 12, "F4": 12, "F5": 11, "F6": 11, "F7": 17}

# Spur edges per feeder, keyed by (size, material-group index in BRANCH_CENSUS)
SPUR_ALLOCATION = {
    150: {"F1": 4, "F2": 4, "F3": 4, "F4": 4, "F5": 11, "F6": 10, "F7": 10},
    100: {"F1": 1, "F2": 1},
    95: {"F1": 2, "F2": 2, "F3": 2, "F4": 2, "F5": 4, "F6": 4, "F7": 3},
    70: {"F3": 1},
    63: {"F4": 1, "F5": 1},
    54: {"F6": 1, "F7": 1},
    40: {"F1": 1, "F2": 1, "F3": 1, "F4": 1},
    35: {"F5": 2, "F6": 2, "F7": 2},
    25: {"F1": 1, "F2": 1, "F3": 1, "F6": 1, "F7": 1},
    20: {"F5": 1},
}

# Share of the 10,000 households served by each feeder; the residential
# feeders F5-F7 carry most of the domestic (and hence EV) demand.
HOUSEHOLD_SHARE = {"F1": 0.075, "F2": 0.075, "F3": 0.075, "F4": 0.075, "F5": 0.20, "F6": 0.20, "F7": 0.30}

MV_CUSTOMER_COUNT = {"F1": 10, "F2": 10, "F3": 8, "F4": 6, "F5": 2, "F6": 1, "F7": 1}
GENERATOR_COUNT = {"F1": 6, "F2": 6, "F3": 5, "F4": 4}

# Default connection points for park-&-ride facilities: mid-trunk nodes
# on three distinct feeders.
PR_CONNECTION_BUSES = ("F1-T06", "F2-T06", "F3-T06")


def _split_total(rng: np.random.Generator, total: float, n: int, spread: float = 0.3):
    """n positive parts summing exactly to total, with seeded variation."""
    if n == 1:
        return [total]
    weights = rng.uniform(1.0 - spread, 1.0 + spread, size=n)
    parts = weights / weights.sum() * total
    # re-normalize the last element against accumulated float error
    parts[-1] = total - parts[:-1].sum()
    return [float(p) for p in parts]


def _largest_remainder(weights, total: int):
    """Integer apportionment of `total` proportional to `weights`."""
    weights = np.asarray(weights, dtype=float)
    raw = weights / weights.sum() * total
    counts = np.floor(raw).astype(int)
    shortfall = total - int(counts.sum())
    order = np.argsort(-(raw - counts))
    for i in order[:shortfall]:
        counts[i] += 1
    return counts.tolist()


def _branch_impedance(size: int, material: str):
    r = RESISTIVITY[material] * 1000.0 / size
    x = X_UNDERGROUND_OHM_PER_KM if size >= 95 else X_OVERHEAD_OHM_PER_KM
    return r, x


class _FeederBuilder:
    """Accumulates one feeder's buses and branches."""

    def __init__(self, feeder_id: str, root_bus: str, rng: np.random.Generator):
        self.feeder_id = feeder_id
        self.root_bus = root_bus
        self.rng = rng
        self.buses: list[Bus] = []
        self.branches: list[Branch] = []
        self.trunk_nodes: list[str] = []
        self.spur_nodes: list[str] = []
        # electrical depth in ohms of series resistance from the busbar
        self.depth_r: dict[str, float] = {}

    def build_trunk(self, lengths, size, material):
        parent = self.root_bus
        parent_r = 0.0
        r_km, x_km = _branch_impedance(size, material)
        for i, length in enumerate(lengths, start=1):
            node = f"{self.feeder_id}-T{i:02d}"
            self.buses.append(Bus(id=node, nominal_kv=15.0, feeder_id=self.feeder_id))
            self.branches.append(
                Branch(
                    id=f"{self.feeder_id}-B{len(self.branches) + 1:03d}",
                    from_bus=parent,
                    to_bus=node,
                    length_km=length,
                    cross_section_mm2=float(size),
                    material=material,
                    r_ohm_per_km=r_km,
                    x_ohm_per_km=x_km,
                    ampacity_a=AMPACITY_A[(size, material)],
                )
            )
            parent_r += r_km * length
            self.depth_r[node] = parent_r
            self.trunk_nodes.append(node)
            parent = node

    def add_spur(self, length, size, material):
        """Hang one spur edge off a seeded existing node."""
        candidates = self.trunk_nodes + self.spur_nodes
        parent = candidates[int(self.rng.integers(0, len(candidates)))]
        node = f"{self.feeder_id}-S{len(self.spur_nodes) + 1:02d}"
        r_km, x_km = _branch_impedance(size, material)
        self.buses.append(Bus(id=node, nominal_kv=15.0, feeder_id=self.feeder_id))
        self.branches.append(
            Branch(
                id=f"{self.feeder_id}-B{len(self.branches) + 1:03d}",
                from_bus=parent,
                to_bus=node,
                length_km=length,
                cross_section_mm2=float(size),
                material=material,
                r_ohm_per_km=r_km,
                x_ohm_per_km=x_km,
                ampacity_a=AMPACITY_A[(size, material)],
            )
        )
        self.depth_r[node] = self.depth_r.get(parent, 0.0) + r_km * length
        self.spur_nodes.append(node)

    def nodes_by_depth(self, deepest_first=True):
        nodes = self.trunk_nodes + self.spur_nodes
        return sorted(nodes, key=lambda n: self.depth_r[n], reverse=deepest_first)


def synthesize_reference_grid(seed: int) -> Grid:
    """Build the reference grid; byte-identical output for a given seed."""
    rng = np.random.default_rng(seed)

    buses = [
        Bus(id="HV", nominal_kv=132.0, kind="slack"),
        Bus(id="MV0A", nominal_kv=15.0),
        Bus(id="MV0B", nominal_kv=15.0),
    ]
    transformers = [
        Transformer(
            id="T-PRIMARY",
            hv_bus="HV",
            lv_bus="MV0A",
            rating_kva=PRIMARY_RATING_KVA,
            v1_kv=132.0,
            v2_kv=15.6,
            uk_percent=PRIMARY_UK_PERCENT,
            load_loss_kw=PRIMARY_LOAD_LOSS_KW,
            role="primary",
        )
    ]
    # busbar section tie keeps the "178 branch lines" total alongside the
    # 177 line-class segments of BRANCH_CENSUS
    branches = [
        Branch(
            id="MV0-TIE",
            from_bus="MV0A",
            to_bus="MV0B",
            length_km=0.01,
            cross_section_mm2=400.0,
            material="CU",
            r_ohm_per_km=RESISTIVITY["CU"] * 1000.0 / 400.0,
            x_ohm_per_km=X_UNDERGROUND_OHM_PER_KM,
            ampacity_a=AMPACITY_A[(400, "CU")],
        )
    ]

    # --- feeder topology -------------------------------------------------
    census = {row[0]: row for row in BRANCH_CENSUS}

    trunk_rows = {"F1": 240, "F2": 240, "F3": 240, "F4": 240, "F5": 185, "F6": 185, "F7": 185}
    builders: dict[str, _FeederBuilder] = {}
    for size in (240, 185):
        _, materials, total_km, quantity = census[size]
        feeders = [f for f in FEEDERS if trunk_rows[f] == size]
        n_segments = [TRUNK_SEGMENTS[f] for f in feeders]
        assert sum(n_segments) == quantity
        lengths = _split_total(rng, total_km, quantity)
        offset = 0
        for feeder, n_seg in zip(feeders, n_segments):
            builder = _FeederBuilder(feeder, f"MV0{FEEDER_SECTION[feeder]}", rng)
            builder.build_trunk(lengths[offset : offset + n_seg], size, materials[0])
            builders[feeder] = builder
            offset += n_seg

    for size, _, total_km, quantity in BRANCH_CENSUS:
        if size in (240, 185):
            continue
        allocation = SPUR_ALLOCATION[size]
        assert sum(allocation.values()) == quantity
        materials = census[size][1]
        lengths = _split_total(rng, total_km, quantity)
        idx = 0
        for feeder in FEEDERS:
            for _ in range(allocation.get(feeder, 0)):
                # two-material rows alternate between their materials
                material = materials[idx % len(materials)]
                builders[feeder].add_spur(lengths[idx], size, material)
                idx += 1

    for feeder in FEEDERS:
        buses.extend(builders[feeder].buses)
        branches.extend(builders[feeder].branches)

    # --- secondary substations and LV aggregates -------------------------
    substation_ratings = [
        rating for rating, qty in DISTRIBUTION_TRANSFORMER_CENSUS for _ in range(qty)
    ]
    n_substations = len(substation_ratings)
    per_feeder = _largest_remainder([HOUSEHOLD_SHARE[f] for f in FEEDERS], n_substations)
    feeder_households = _largest_remainder([HOUSEHOLD_SHARE[f] for f in FEEDERS], N_HOUSEHOLDS)

    # deal ratings (descending) round-robin across feeders with open quota
    deal_order: list[str] = []
    quota = dict(zip(FEEDERS, per_feeder))
    while any(quota.values()):
        for feeder in FEEDERS:
            if quota[feeder] > 0:
                deal_order.append(feeder)
                quota[feeder] -= 1
    loads: list[LoadPoint] = []
    substation_index = 0
    feeder_substations: dict[str, list[float]] = {f: [] for f in FEEDERS}
    for rating, feeder in zip(sorted(substation_ratings, reverse=True), deal_order):
        feeder_substations[feeder].append(rating)

    for feeder in FEEDERS:
        ratings = feeder_substations[feeder]
        households = _largest_remainder(ratings, feeder_households[FEEDERS.index(feeder)])
        # domestic demand sits electrically far out on the residential
        # feeders and close to the busbar on the industrial ones; wrap
        # around when a feeder hosts more substations than nodes
        residential = MV_CUSTOMER_COUNT[feeder] <= 2
        nodes = builders[feeder].nodes_by_depth(deepest_first=residential)
        for i, (rating, n_hh) in enumerate(zip(ratings, households)):
            substation_index += 1
            mv_node = nodes[i % len(nodes)]
            lv_bus = f"SS{substation_index:03d}-LV"
            buses.append(Bus(id=lv_bus, nominal_kv=0.4, feeder_id=feeder))
            transformers.append(
                Transformer(
                    id=f"TD{substation_index:03d}",
                    hv_bus=mv_node,
                    lv_bus=lv_bus,
                    rating_kva=float(rating),
                    v1_kv=15.0,
                    v2_kv=0.4,
                    uk_percent=DISTRIBUTION_UK_PERCENT,
                    load_loss_kw=DISTRIBUTION_LOAD_LOSS_FRACTION * rating,
                    role="distribution",
                )
            )
            loads.append(
                LoadPoint(
                    id=f"LV{substation_index:03d}",
                    bus=lv_bus,
                    klass="lv_aggregate",
                    installed_kw=max(n_hh, 1) * HOUSEHOLD_INSTALLED_KW,
                    power_factor=LV_AGGREGATE_POWER_FACTOR,
                    profile_ref="lv_household",
                    n_households=max(n_hh, 1),
                )
            )

    # --- MV customers -----------------------------------------------------
    weights = rng.lognormal(mean=0.0, sigma=0.5, size=N_MV_CUSTOMERS)
    installed = np.maximum(weights / weights.sum() * MV_CUSTOMER_TOTAL_KW, 150.0)
    installed = np.round(installed / installed.sum() * MV_CUSTOMER_TOTAL_KW, 1)
    installed[-1] += MV_CUSTOMER_TOTAL_KW - installed.sum()
    customer_index = 0
    for feeder in FEEDERS:
        trunk = builders[feeder].trunk_nodes
        count = MV_CUSTOMER_COUNT[feeder]
        # industrial clients connect on the first trunk kilometres
        positions = np.linspace(0, min(7, len(trunk) - 1), count).round().astype(int)
        for pos in positions:
            customer_index += 1
            loads.append(
                LoadPoint(
                    id=f"MV{customer_index:02d}",
                    bus=trunk[pos],
                    klass="mv_customer",
                    installed_kw=float(installed[customer_index - 1]),
                    power_factor=MV_CUSTOMER_POWER_FACTOR,
                    profile_ref="mv_customer",
                )
            )

    # --- embedded generation ---------------------------------------------
    generators: list[Generator] = []
    gen_units = [
        (kind, pf, rating)
        for kind, pf, ratings in GENERATOR_UNITS
        for rating in ratings
    ]
    stepup_ratings = sorted(
        (rating for rating, qty in GENERATOR_TRANSFORMER_CENSUS for _ in range(qty)),
        reverse=True,
    )
    gen_feeders = [f for f, n in GENERATOR_COUNT.items() for _ in range(n)]
    gen_units_sorted = sorted(gen_units, key=lambda u: -u[2])
    for i, ((kind, pf, rating), stepup) in enumerate(zip(gen_units_sorted, stepup_ratings), start=1):
        feeder = gen_feeders[(i - 1) % len(gen_feeders)]
        nodes = builders[feeder].trunk_nodes
        mv_node = nodes[int(rng.integers(0, len(nodes)))]
        lv_bus = f"DG{i:02d}-LV"
        buses.append(Bus(id=lv_bus, nominal_kv=0.4, feeder_id=feeder))
        transformers.append(
            Transformer(
                id=f"TG{i:02d}",
                hv_bus=mv_node,
                lv_bus=lv_bus,
                rating_kva=float(stepup),
                v1_kv=15.0,
                v2_kv=0.4,
                uk_percent=STEPUP_UK_PERCENT,
                load_loss_kw=STEPUP_LOAD_LOSS_FRACTION * stepup,
                role="generator_stepup",
            )
        )
        generators.append(
            Generator(
                id=f"DG{i:02d}",
                bus=lv_bus,
                kind=kind,
                rated_kva=rating,
                power_factor=pf,
                profile_ref="pv" if kind == "ST" else "rotating_dg",
            )
        )

    return Grid(
        name=f"reference-grid-seed{seed}",
        base_mva=40.0,
        buses=tuple(buses),
        branches=tuple(branches),
        transformers=tuple(transformers),
        generators=tuple(generators),
        loads=tuple(loads),
    )
