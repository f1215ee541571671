"""Network data model: buses, branches, transformers, generators, loads.

All types are frozen dataclasses; a Grid is immutable after construction
and safe to share between threads.  Electrical conventions:

* three voltage tiers: 132 kV (HV), 15 kV (MV), 0.4 kV (LV)
* branches connect buses of the same nominal voltage
* transformers are the only inter-tier edges
* one slack bus per grid (the HV infeed)
"""

from __future__ import annotations

from dataclasses import dataclass, field

SLACK = "slack"
PQ = "pq"

BUS_KINDS = (SLACK, PQ)
BRANCH_MATERIALS = ("AL", "AC", "CU")
TRANSFORMER_ROLES = ("primary", "distribution", "generator_stepup")
GENERATOR_KINDS = ("SI", "AS", "ST")
LOAD_CLASSES = ("mv_customer", "lv_aggregate")


@dataclass(frozen=True)
class Bus:
    """One electrical node.

    Attributes:
        id: unique identifier within the grid
        nominal_kv: nominal voltage (132, 15 or 0.4 for reference grids)
        kind: "slack" (exactly one per grid) or "pq"
        feeder_id: MV feeder this bus belongs to, None for the HV side
            and the main MV busbar
    """

    id: str
    nominal_kv: float
    kind: str = PQ
    feeder_id: str | None = None


@dataclass(frozen=True)
class Branch:
    """A line or cable segment between two buses of equal nominal voltage."""

    id: str
    from_bus: str
    to_bus: str
    length_km: float
    cross_section_mm2: float
    material: str
    r_ohm_per_km: float
    x_ohm_per_km: float
    ampacity_a: float


@dataclass(frozen=True)
class Transformer:
    """Two-winding transformer modeled as a series impedance.

    uk_percent is the short-circuit voltage, load_loss_kw the copper loss
    at rated power; both referred to rating_kva.  The magnetizing branch
    is neglected.
    """

    id: str
    hv_bus: str
    lv_bus: str
    rating_kva: float
    v1_kv: float
    v2_kv: float
    uk_percent: float
    load_loss_kw: float
    role: str


@dataclass(frozen=True)
class Generator:
    """Distributed generator (SI = synchronous, AS = asynchronous, ST = PV).

    Active output at step t is rated_kva * power_factor * profile[t];
    reactive output follows the power factor (zero for ST units).
    """

    id: str
    bus: str
    kind: str
    rated_kva: float
    power_factor: float
    profile_ref: str


@dataclass(frozen=True)
class LoadPoint:
    """Aggregated demand at one bus.

    An "mv_customer" is a single industrial client; an "lv_aggregate"
    gathers all households under one secondary substation into a single
    balanced three-phase equivalent.
    """

    id: str
    bus: str
    klass: str
    installed_kw: float
    power_factor: float
    profile_ref: str
    n_households: int | None = None


@dataclass(frozen=True)
class Grid:
    """The full network under study.

    Collections are tuples (immutability); id-keyed lookup maps are built
    once at construction.  base_mva is the system base for per-unit work.
    """

    name: str
    base_mva: float
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    transformers: tuple[Transformer, ...]
    generators: tuple[Generator, ...]
    loads: tuple[LoadPoint, ...]
    tap_tolerance: float = 0.05
    _bus_map: dict = field(init=False, repr=False, compare=False, hash=False)
    _load_map: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_bus_map", {b.id: b for b in self.buses})
        object.__setattr__(self, "_load_map", {l.id: l for l in self.loads})

    def bus(self, bus_id: str) -> Bus:
        return self._bus_map[bus_id]

    def has_bus(self, bus_id: str) -> bool:
        return bus_id in self._bus_map

    @property
    def slack_bus(self) -> Bus:
        for b in self.buses:
            if b.kind == SLACK:
                return b
        raise LookupError("grid has no slack bus")

    @property
    def primary_transformer(self) -> Transformer:
        for t in self.transformers:
            if t.role == "primary":
                return t
        raise LookupError("grid has no primary transformer")

    def mv_buses(self) -> list[Bus]:
        """Buses at the 15 kV distribution level."""
        return [b for b in self.buses if abs(b.nominal_kv - 15.0) < 0.5]

    def edges(self):
        """All (edge_id, from_bus, to_bus) pairs, branches then transformers."""
        for br in self.branches:
            yield br.id, br.from_bus, br.to_bus
        for tr in self.transformers:
            yield tr.id, tr.hv_bus, tr.lv_bus

    def total_households(self) -> int:
        return sum(l.n_households or 0 for l in self.loads if l.klass == "lv_aggregate")
