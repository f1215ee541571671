"""Reduction of a Grid to per-unit tree arrays for the sweep kernel.

Buses are ordered breadth-first from the slack bus, so every node's
parent precedes it.  Branches contribute their series impedance on the
voltage base of their level; transformers contribute the short-circuit
impedance from uk_percent / load_loss_kw re-based to the system base.
With voltage bases equal to bus nominals the ideal-ratio part of every
transformer drops out of the per-unit network.
"""

from __future__ import annotations

import cmath
import math
from collections import deque

import numpy as np

from ..errors import PowerFlowError
from ..model import Grid
from .types import SnapshotInjections, SnapshotSolution, SolveOptions
from . import kernel


class RadialNetwork:
    """Per-unit tree form of a grid, reusable across snapshots."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.base_mva = grid.base_mva
        slack = grid.slack_bus

        adjacency: dict[str, list[tuple[str, str, str]]] = {b.id: [] for b in grid.buses}
        branch_by_id = {br.id: br for br in grid.branches}
        trafo_by_id = {t.id: t for t in grid.transformers}
        for edge_id, u, v in grid.edges():
            kind = "branch" if edge_id in branch_by_id else "trafo"
            adjacency[u].append((edge_id, v, kind))
            adjacency[v].append((edge_id, u, kind))

        order: list[str] = [slack.id]
        parent = [-1]
        edge_ids: list[str | None] = [None]
        index = {slack.id: 0}
        used_edges = set()
        queue = deque([slack.id])
        while queue:
            node = queue.popleft()
            for edge_id, other, kind in adjacency[node]:
                if edge_id in used_edges:
                    continue
                if other in index:
                    raise PowerFlowError(
                        f"network is not radial: edge {edge_id!r} closes a cycle at {other!r}"
                    )
                used_edges.add(edge_id)
                index[other] = len(order)
                parent.append(index[node])
                edge_ids.append(edge_id)
                order.append(other)
                queue.append(other)

        if len(order) != len(grid.buses):
            missing = sorted(set(b.id for b in grid.buses) - set(order))
            raise PowerFlowError(
                f"singular network: {len(missing)} bus(es) not connected to the slack "
                f"(first: {missing[0]!r})"
            )

        n = len(order)
        z = np.zeros(n, dtype=np.complex128)
        for i in range(1, n):
            edge_id = edge_ids[i]
            if edge_id in branch_by_id:
                br = branch_by_id[edge_id]
                kv = grid.bus(br.from_bus).nominal_kv
                z_base = kv * kv / self.base_mva
                z[i] = complex(br.r_ohm_per_km, br.x_ohm_per_km) * br.length_km / z_base
            else:
                t = trafo_by_id[edge_id]
                scale = self.base_mva * 1000.0 / t.rating_kva
                r_own = t.load_loss_kw / t.rating_kva
                z_own = t.uk_percent / 100.0
                x_own = math.sqrt(max(z_own * z_own - r_own * r_own, 0.0))
                z[i] = complex(r_own, x_own) * scale

        self.order = order
        self.index = index
        self.parent = np.asarray(parent, dtype=np.int32)
        self.edge_ids = edge_ids
        self.z = z
        self._branch_by_id = branch_by_id
        self._trafo_by_id = trafo_by_id
        # current base in A per node's voltage level, for edge-current output
        self._i_base_a = [
            self.base_mva * 1e6 / (math.sqrt(3) * grid.bus(b).nominal_kv * 1e3)
            for b in order
        ]

    def injection_vector(self, injections: SnapshotInjections) -> np.ndarray:
        """Per-unit complex consumption array aligned to node order."""
        s = np.zeros(len(self.order), dtype=np.complex128)
        slack_id = self.order[0]
        for bus_id, p in injections.p_mw.items():
            if bus_id == slack_id:
                raise PowerFlowError("slack bus must not carry a specified injection")
            if bus_id not in self.index:
                raise PowerFlowError(f"injection references unknown bus {bus_id!r}")
            s[self.index[bus_id]] += p / self.base_mva
        for bus_id, q in injections.q_mvar.items():
            if bus_id == slack_id:
                raise PowerFlowError("slack bus must not carry a specified injection")
            if bus_id not in self.index:
                raise PowerFlowError(f"injection references unknown bus {bus_id!r}")
            s[self.index[bus_id]] += 1j * q / self.base_mva
        return s

    def solve(self, injections: SnapshotInjections, options: SolveOptions) -> SnapshotSolution:
        s = self.injection_vector(injections)
        v, cur, iterations, converged, mismatch = kernel.run_sweep(
            self.parent, self.z, s, complex(1.0, 0.0), options.tolerance_pu, options.max_iterations
        )
        return self._build_solution(s, v, cur, iterations, converged, mismatch)

    def _build_solution(self, s, v, cur, iterations, converged, mismatch) -> SnapshotSolution:
        n = len(self.order)
        v_mag = {}
        v_ang = {}
        for i, bus_id in enumerate(self.order):
            v_mag[bus_id] = float(abs(v[i]))
            v_ang[bus_id] = float(cmath.phase(v[i]))

        branch_current = {}
        branch_loading = {}
        trafo_s = {}
        trafo_loading = {}
        trafo_p = {}
        for i in range(1, n):
            edge_id = self.edge_ids[i]
            flow = cur[i]
            if edge_id in self._branch_by_id:
                br = self._branch_by_id[edge_id]
                amps = float(abs(flow)) * self._i_base_a[i]
                branch_current[edge_id] = amps
                branch_loading[edge_id] = amps / br.ampacity_a * 100.0
            else:
                t = self._trafo_by_id[edge_id]
                s_hv = complex(v[self.parent[i]] * flow.conjugate())
                s_kva = abs(s_hv) * self.base_mva * 1000.0
                trafo_s[edge_id] = s_kva
                trafo_loading[edge_id] = s_kva / t.rating_kva * 100.0
                trafo_p[edge_id] = s_hv.real * self.base_mva

        slack_power = v[0] * cur[0].conjugate() * self.base_mva
        net_load_mw = float(s.real.sum()) * self.base_mva
        losses = slack_power.real - net_load_mw

        return SnapshotSolution(
            v_magnitude_pu=v_mag,
            v_angle_rad=v_ang,
            branch_current_a=branch_current,
            branch_loading_percent=branch_loading,
            transformer_s_kva=trafo_s,
            transformer_loading_percent=trafo_loading,
            transformer_p_hv_mw=trafo_p,
            losses_mw=float(losses),
            slack_p_mw=float(slack_power.real),
            slack_q_mvar=float(slack_power.imag),
            converged=bool(converged),
            iterations=int(iterations),
            max_mismatch_pu=float(mismatch),
        )
