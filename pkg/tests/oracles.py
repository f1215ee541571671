"""Independent reference implementations the main code is checked against.

Kept deliberately separate from the package internals:

* a Gauss-Seidel fixed-point power-flow solver working on a nodal
  admittance matrix built directly from the grid document,
* a max-flow (Dinic) feasibility check and bisection min-peak oracle
  for charging schedules, plus an integral-capacity variant that scans
  discretized peak levels.
"""

from __future__ import annotations

import numpy as np

STEP_HOURS = 0.25


# ---------------------------------------------------------------------------
# Power flow: Gauss-Seidel on the bus admittance matrix
# ---------------------------------------------------------------------------


def _edge_impedance_pu(grid, edge_id):
    branch = next((b for b in grid.branches if b.id == edge_id), None)
    if branch is not None:
        kv = grid.bus(branch.from_bus).nominal_kv
        z_base = kv * kv / grid.base_mva
        return complex(branch.r_ohm_per_km, branch.x_ohm_per_km) * branch.length_km / z_base
    trafo = next(t for t in grid.transformers if t.id == edge_id)
    scale = grid.base_mva * 1000.0 / trafo.rating_kva
    r = trafo.load_loss_kw / trafo.rating_kva
    x = np.sqrt(max((trafo.uk_percent / 100.0) ** 2 - r * r, 0.0))
    return complex(r, x) * scale


def gauss_seidel_voltages(grid, injections, tol=1e-12, max_iter=100000):
    """Per-bus complex voltage by Gauss-Seidel iteration on Ybus."""
    bus_ids = [b.id for b in grid.buses]
    index = {bid: i for i, bid in enumerate(bus_ids)}
    n = len(bus_ids)
    ybus = np.zeros((n, n), dtype=complex)
    for edge_id, u, v in grid.edges():
        y = 1.0 / _edge_impedance_pu(grid, edge_id)
        iu, iv = index[u], index[v]
        ybus[iu, iu] += y
        ybus[iv, iv] += y
        ybus[iu, iv] -= y
        ybus[iv, iu] -= y

    s = np.zeros(n, dtype=complex)
    for bid, p in injections.p_mw.items():
        s[index[bid]] += p / grid.base_mva
    for bid, q in injections.q_mvar.items():
        s[index[bid]] += 1j * q / grid.base_mva

    slack = index[grid.slack_bus.id]
    v = np.ones(n, dtype=complex)
    for _ in range(max_iter):
        max_dv = 0.0
        for i in range(n):
            if i == slack:
                continue
            total = ybus[i] @ v - ybus[i, i] * v[i]
            # injected current: conj(-S/V) since s counts consumption
            vi = ((-s[i] / v[i]).conjugate() - total) / ybus[i, i]
            max_dv = max(max_dv, abs(vi - v[i]))
            v[i] = vi
        if max_dv < tol:
            break
    return dict(zip(bus_ids, v))


# ---------------------------------------------------------------------------
# Scheduling: max-flow feasibility and min-peak search
# ---------------------------------------------------------------------------


class _Dinic:
    def __init__(self, n):
        self.n = n
        self.to = []
        self.cap = []
        self.head = [[] for _ in range(n)]

    def add_edge(self, u, v, capacity):
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(float(capacity))
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0.0)

    def max_flow(self, src, dst, eps=1e-12):
        flow = 0.0
        while True:
            level = [-1] * self.n
            level[src] = 0
            queue = [src]
            for u in queue:
                for e in self.head[u]:
                    if self.cap[e] > eps and level[self.to[e]] < 0:
                        level[self.to[e]] = level[u] + 1
                        queue.append(self.to[e])
            if level[dst] < 0:
                return flow
            it = [0] * self.n

            def dfs(u, limit):
                if u == dst:
                    return limit
                while it[u] < len(self.head[u]):
                    e = self.head[u][it[u]]
                    v = self.to[e]
                    if self.cap[e] > eps and level[v] == level[u] + 1:
                        pushed = dfs(v, min(limit, self.cap[e]))
                        if pushed > eps:
                            self.cap[e] -= pushed
                            self.cap[e ^ 1] += pushed
                            return pushed
                    it[u] += 1
                return 0.0

            while True:
                pushed = dfs(src, float("inf"))
                if pushed <= eps:
                    break
                flow += pushed


def peak_feasible(sessions, peak_kw, n_steps=96):
    """Can every session be served with the aggregate capped at peak_kw?"""
    steps = sorted({t for s in sessions for t in range(s.arrival_step, s.departure_step)})
    step_node = {t: 1 + len(sessions) + i for i, t in enumerate(steps)}
    n = 2 + len(sessions) + len(steps)
    src, dst = 0, n - 1
    net = _Dinic(n)
    total = 0.0
    for i, s in enumerate(sessions):
        net.add_edge(src, 1 + i, s.energy_kwh)
        total += s.energy_kwh
        for t in range(s.arrival_step, s.departure_step):
            net.add_edge(1 + i, step_node[t], s.p_max_kw * STEP_HOURS)
    for t in steps:
        net.add_edge(step_node[t], dst, peak_kw * STEP_HOURS)
    return net.max_flow(src, dst) >= total - 1e-9


def min_peak_by_bisection(sessions, tol_kw=1e-6):
    """Exact min-peak value by bisection over the (monotone) feasibility set."""
    if not sessions:
        return 0.0
    hi = sum(s.p_max_kw for s in sessions)
    lo = 0.0
    if peak_feasible(sessions, lo):
        return 0.0
    while hi - lo > tol_kw:
        mid = 0.5 * (lo + hi)
        if peak_feasible(sessions, mid):
            hi = mid
        else:
            lo = mid
    return hi


def min_peak_discretized(sessions, quantum_kw=0.1):
    """Smallest feasible peak on the quantum grid.

    With session energies that are multiples of quantum_kw * 0.25 h, flow
    integrality makes this identical to exhaustive search over schedules
    whose powers are multiples of quantum_kw.
    """
    if not sessions:
        return 0.0
    exact = min_peak_by_bisection(sessions)
    level = int(np.floor(exact / quantum_kw + 1e-9))
    while not peak_feasible(sessions, level * quantum_kw + 1e-12):
        level += 1
    return level * quantum_kw
