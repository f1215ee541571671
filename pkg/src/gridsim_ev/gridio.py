"""Grid interchange format (JSON, ``gridsim-ev/1``) and invariant validation.

The document layout is flat: top-level arrays ``buses``, ``branches``,
``transformers``, ``generators``, ``loads`` plus scalars ``format``,
``name``, ``base_mva`` and optional ``tap_tolerance``.  Units are kV, km,
ohm/km, A, kVA, kW throughout.  ``load_grid`` performs referential checks
(unresolved ids, duplicates, voltage mismatch across a branch) but no
normalization; electrical invariants are the job of ``validate_grid``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import GridFormatError
from .model import (
    BRANCH_MATERIALS,
    BUS_KINDS,
    GENERATOR_KINDS,
    LOAD_CLASSES,
    SLACK,
    TRANSFORMER_ROLES,
    Branch,
    Bus,
    Generator,
    Grid,
    LoadPoint,
    Transformer,
)

FORMAT_TAG = "gridsim-ev/1"

_BUS_FIELDS = ("id", "nominal_kv", "kind")
_BRANCH_FIELDS = (
    "id",
    "from_bus",
    "to_bus",
    "length_km",
    "cross_section_mm2",
    "material",
    "r_ohm_per_km",
    "x_ohm_per_km",
    "ampacity_a",
)
_TRAFO_FIELDS = (
    "id",
    "hv_bus",
    "lv_bus",
    "rating_kva",
    "v1_kv",
    "v2_kv",
    "uk_percent",
    "load_loss_kw",
    "role",
)
_GEN_FIELDS = ("id", "bus", "kind", "rated_kva", "power_factor", "profile_ref")
_LOAD_FIELDS = ("id", "bus", "class", "installed_kw", "power_factor", "profile_ref")


def _require(record: dict, fields, section: str):
    for f in fields:
        if f not in record:
            raise GridFormatError(f"{section} record {record.get('id', '?')!r} missing field {f!r}")


def load_grid(document: str) -> Grid:
    """Parse a grid document into a Grid.

    Raises GridFormatError on syntax errors (position-reported), missing
    fields, duplicate ids, unresolved bus references, or a branch whose
    endpoints have different nominal voltages.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise GridFormatError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc

    if not isinstance(doc, dict):
        raise GridFormatError("top-level document must be an object")
    if doc.get("format") != FORMAT_TAG:
        raise GridFormatError(f"missing or unsupported format tag (expected {FORMAT_TAG!r})")

    buses = []
    for rec in doc.get("buses", []):
        _require(rec, _BUS_FIELDS, "bus")
        buses.append(
            Bus(
                id=str(rec["id"]),
                nominal_kv=float(rec["nominal_kv"]),
                kind=str(rec["kind"]),
                feeder_id=rec.get("feeder_id"),
            )
        )

    branches = []
    for rec in doc.get("branches", []):
        _require(rec, _BRANCH_FIELDS, "branch")
        branches.append(
            Branch(
                id=str(rec["id"]),
                from_bus=str(rec["from_bus"]),
                to_bus=str(rec["to_bus"]),
                length_km=float(rec["length_km"]),
                cross_section_mm2=float(rec["cross_section_mm2"]),
                material=str(rec["material"]),
                r_ohm_per_km=float(rec["r_ohm_per_km"]),
                x_ohm_per_km=float(rec["x_ohm_per_km"]),
                ampacity_a=float(rec["ampacity_a"]),
            )
        )

    transformers = []
    for rec in doc.get("transformers", []):
        _require(rec, _TRAFO_FIELDS, "transformer")
        transformers.append(
            Transformer(
                id=str(rec["id"]),
                hv_bus=str(rec["hv_bus"]),
                lv_bus=str(rec["lv_bus"]),
                rating_kva=float(rec["rating_kva"]),
                v1_kv=float(rec["v1_kv"]),
                v2_kv=float(rec["v2_kv"]),
                uk_percent=float(rec["uk_percent"]),
                load_loss_kw=float(rec["load_loss_kw"]),
                role=str(rec["role"]),
            )
        )

    generators = []
    for rec in doc.get("generators", []):
        _require(rec, _GEN_FIELDS, "generator")
        generators.append(
            Generator(
                id=str(rec["id"]),
                bus=str(rec["bus"]),
                kind=str(rec["kind"]),
                rated_kva=float(rec["rated_kva"]),
                power_factor=float(rec["power_factor"]),
                profile_ref=str(rec["profile_ref"]),
            )
        )

    loads = []
    for rec in doc.get("loads", []):
        _require(rec, _LOAD_FIELDS, "load")
        n_households = rec.get("n_households")
        loads.append(
            LoadPoint(
                id=str(rec["id"]),
                bus=str(rec["bus"]),
                klass=str(rec["class"]),
                installed_kw=float(rec["installed_kw"]),
                power_factor=float(rec["power_factor"]),
                profile_ref=str(rec["profile_ref"]),
                n_households=None if n_households is None else int(n_households),
            )
        )

    grid = Grid(
        name=str(doc.get("name", "unnamed")),
        base_mva=float(doc.get("base_mva", 10.0)),
        buses=tuple(buses),
        branches=tuple(branches),
        transformers=tuple(transformers),
        generators=tuple(generators),
        loads=tuple(loads),
        tap_tolerance=float(doc.get("tap_tolerance", 0.05)),
    )
    _check_references(grid)
    return grid


def _check_references(grid: Grid):
    """Referential integrity enforced at parse time."""
    for collection, label in (
        (grid.buses, "bus"),
        (grid.branches, "branch"),
        (grid.transformers, "transformer"),
        (grid.generators, "generator"),
        (grid.loads, "load"),
    ):
        seen = set()
        for item in collection:
            if item.id in seen:
                raise GridFormatError(f"duplicate {label} id {item.id!r}")
            seen.add(item.id)

    def check_bus(ref, owner):
        if not grid.has_bus(ref):
            raise GridFormatError(f"{owner} references missing bus {ref!r}")

    for br in grid.branches:
        check_bus(br.from_bus, f"branch {br.id!r}")
        check_bus(br.to_bus, f"branch {br.id!r}")
        kv_from = grid.bus(br.from_bus).nominal_kv
        kv_to = grid.bus(br.to_bus).nominal_kv
        if not math.isclose(kv_from, kv_to, rel_tol=1e-9):
            raise GridFormatError(
                f"branch {br.id!r} connects different voltage levels ({kv_from} kV vs {kv_to} kV)"
            )
    for tr in grid.transformers:
        check_bus(tr.hv_bus, f"transformer {tr.id!r}")
        check_bus(tr.lv_bus, f"transformer {tr.id!r}")
    for gen in grid.generators:
        check_bus(gen.bus, f"generator {gen.id!r}")
    for load in grid.loads:
        check_bus(load.bus, f"load {load.id!r}")


def serialize_grid(grid: Grid, indent: int | None = None) -> str:
    """Serialize a Grid back to the interchange format.

    Output is key-sorted and therefore byte-stable for a given Grid.
    """
    doc = {
        "format": FORMAT_TAG,
        "name": grid.name,
        "base_mva": grid.base_mva,
        "tap_tolerance": grid.tap_tolerance,
        "buses": [
            {
                "id": b.id,
                "nominal_kv": b.nominal_kv,
                "kind": b.kind,
                **({"feeder_id": b.feeder_id} if b.feeder_id else {}),
            }
            for b in grid.buses
        ],
        "branches": [
            {
                "id": br.id,
                "from_bus": br.from_bus,
                "to_bus": br.to_bus,
                "length_km": br.length_km,
                "cross_section_mm2": br.cross_section_mm2,
                "material": br.material,
                "r_ohm_per_km": br.r_ohm_per_km,
                "x_ohm_per_km": br.x_ohm_per_km,
                "ampacity_a": br.ampacity_a,
            }
            for br in grid.branches
        ],
        "transformers": [
            {
                "id": t.id,
                "hv_bus": t.hv_bus,
                "lv_bus": t.lv_bus,
                "rating_kva": t.rating_kva,
                "v1_kv": t.v1_kv,
                "v2_kv": t.v2_kv,
                "uk_percent": t.uk_percent,
                "load_loss_kw": t.load_loss_kw,
                "role": t.role,
            }
            for t in grid.transformers
        ],
        "generators": [
            {
                "id": g.id,
                "bus": g.bus,
                "kind": g.kind,
                "rated_kva": g.rated_kva,
                "power_factor": g.power_factor,
                "profile_ref": g.profile_ref,
            }
            for g in grid.generators
        ],
        "loads": [
            {
                "id": l.id,
                "bus": l.bus,
                "class": l.klass,
                "installed_kw": l.installed_kw,
                "power_factor": l.power_factor,
                "profile_ref": l.profile_ref,
                **({"n_households": l.n_households} if l.n_households is not None else {}),
            }
            for l in grid.loads
        ],
    }
    return json.dumps(doc, indent=indent, sort_keys=True)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __str__(self):
        if self.ok:
            return "grid valid: no violations"
        lines = [f"{len(self.violations)} violation(s):"]
        lines += [f"  [{v.code}] {v.message}" for v in self.violations]
        return "\n".join(lines)


def validate_grid(grid: Grid) -> ValidationReport:
    """Check every structural invariant; violations are report entries.

    Codes: multiple_slack / no_slack, bad_value, voltage_mismatch,
    tap_mismatch, bad_power_factor, missing_households, disconnected,
    feeder_not_radial.
    """
    violations: list[Violation] = []

    def add(code, message, *ids):
        violations.append(Violation(code, message, tuple(ids)))

    slack_ids = [b.id for b in grid.buses if b.kind == SLACK]
    if len(slack_ids) > 1:
        add("multiple_slack", f"multiple slack buses: {', '.join(slack_ids)}", *slack_ids)
    elif not slack_ids:
        add("no_slack", "grid has no slack bus")

    for b in grid.buses:
        if b.kind not in BUS_KINDS:
            add("bad_value", f"bus {b.id!r} has unknown kind {b.kind!r}", b.id)
        if b.nominal_kv <= 0:
            add("bad_value", f"bus {b.id!r} has non-positive nominal_kv", b.id)

    for br in grid.branches:
        if br.length_km <= 0:
            add("bad_value", f"branch {br.id!r} has non-positive length", br.id)
        if br.r_ohm_per_km <= 0:
            add("bad_value", f"branch {br.id!r} has non-positive resistance", br.id)
        if br.x_ohm_per_km < 0:
            add("bad_value", f"branch {br.id!r} has negative reactance", br.id)
        if br.ampacity_a <= 0:
            add("bad_value", f"branch {br.id!r} has non-positive ampacity", br.id)
        if br.material not in BRANCH_MATERIALS:
            add("bad_value", f"branch {br.id!r} has unknown material {br.material!r}", br.id)
        if br.from_bus == br.to_bus:
            add("bad_value", f"branch {br.id!r} is a self-loop", br.id)

    for t in grid.transformers:
        if t.rating_kva <= 0:
            add("bad_value", f"transformer {t.id!r} has non-positive rating", t.id)
        if not 0 < t.uk_percent < 25:
            add("bad_value", f"transformer {t.id!r} uk_percent outside (0, 25)", t.id)
        if t.load_loss_kw < 0:
            add("bad_value", f"transformer {t.id!r} has negative load loss", t.id)
        if t.role not in TRANSFORMER_ROLES:
            add("bad_value", f"transformer {t.id!r} has unknown role {t.role!r}", t.id)
        for winding_kv, bus_id in ((t.v1_kv, t.hv_bus), (t.v2_kv, t.lv_bus)):
            nominal = grid.bus(bus_id).nominal_kv
            if abs(winding_kv - nominal) > grid.tap_tolerance * nominal:
                add(
                    "tap_mismatch",
                    f"transformer {t.id!r} winding {winding_kv} kV does not match "
                    f"bus {bus_id!r} nominal {nominal} kV within tap tolerance",
                    t.id,
                    bus_id,
                )

    for g in grid.generators:
        if g.kind not in GENERATOR_KINDS:
            add("bad_value", f"generator {g.id!r} has unknown kind {g.kind!r}", g.id)
        elif g.kind == "ST" and g.power_factor != 1.0:
            add("bad_power_factor", f"PV generator {g.id!r} must have unity power factor", g.id)
        elif g.kind in ("SI", "AS") and g.power_factor not in (0.8, 0.9):
            add(
                "bad_power_factor",
                f"rotating generator {g.id!r} power factor must be 0.8 or 0.9",
                g.id,
            )

    for l in grid.loads:
        if l.klass not in LOAD_CLASSES:
            add("bad_value", f"load {l.id!r} has unknown class {l.klass!r}", l.id)
        if l.installed_kw <= 0:
            add("bad_value", f"load {l.id!r} has non-positive installed power", l.id)
        if not 0 < l.power_factor <= 1:
            add("bad_value", f"load {l.id!r} power factor outside (0, 1]", l.id)
        if l.klass == "lv_aggregate" and (l.n_households is None or l.n_households < 1):
            add("missing_households", f"LV aggregate {l.id!r} needs n_households >= 1", l.id)

    violations.extend(_check_topology(grid))
    return ValidationReport(tuple(violations))


def _check_topology(grid: Grid) -> list[Violation]:
    """Connectivity of the whole graph and radiality of each feeder."""
    violations = []
    adjacency: dict[str, list[str]] = {b.id: [] for b in grid.buses}
    for _, u, v in grid.edges():
        adjacency[u].append(v)
        adjacency[v].append(u)

    if grid.buses:
        start = grid.buses[0].id
        seen = {start}
        stack = [start]
        while stack:
            node = stack.pop()
            for nxt in adjacency[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        missing = [b.id for b in grid.buses if b.id not in seen]
        if missing:
            violations.append(
                Violation(
                    "disconnected",
                    f"{len(missing)} bus(es) unreachable from {start!r}: "
                    + ", ".join(sorted(missing)[:5]),
                    tuple(missing),
                )
            )

    # Radiality per feeder: edge count must equal node count - 1 on the
    # subgraph induced by buses sharing the feeder id.
    feeders: dict[str, set[str]] = {}
    for b in grid.buses:
        if b.feeder_id:
            feeders.setdefault(b.feeder_id, set()).add(b.id)
    for feeder_id, nodes in sorted(feeders.items()):
        edge_count = sum(1 for _, u, v in grid.edges() if u in nodes and v in nodes)
        if edge_count > len(nodes) - 1:
            violations.append(
                Violation(
                    "feeder_not_radial",
                    f"feeder {feeder_id!r} contains a cycle "
                    f"({edge_count} internal edges for {len(nodes)} buses)",
                    (feeder_id,),
                )
            )
    return violations
