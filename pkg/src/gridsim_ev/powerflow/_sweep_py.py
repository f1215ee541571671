"""Pure-Python backward/forward sweep kernel.

Reference implementation and fallback when the compiled extension is not
available.  Works on plain Python lists internally; numpy scalar access
would dominate the runtime otherwise.
"""

from __future__ import annotations

import math

import numpy as np


def run_sweep(parent, z, s, v_slack, tol, max_iter):
    """Solve one snapshot on a radial network.

    Args:
        parent: int32 array, parent[i] < i, parent[0] == -1 (slack/root).
        z: complex array, per-unit series impedance of the edge parent[i]->i.
        s: complex array, per-unit net consumption at node i (slack entry ignored).
        v_slack: complex slack voltage (per-unit).
        tol: power-mismatch convergence threshold (per-unit).
        max_iter: sweep limit.

    Returns:
        (v, current, iterations, converged, mismatch) where v is the complex
        node voltage array and current[i] the complex flow on edge parent[i]->i
        (current[0] is the total slack infeed).
    """
    n = len(parent)
    par = parent.tolist()
    zz = z.tolist()
    ss = s.tolist()
    v = [complex(v_slack)] * n
    inj = [0j] * n
    cur = [0j] * n
    iterations = 0
    converged = False
    mismatch = math.inf

    while iterations < max_iter:
        iterations += 1
        # nodal currents from the present voltage estimate
        for i in range(1, n):
            inj[i] = (ss[i] / v[i]).conjugate()
        cur[:] = inj
        # backward: accumulate subtree currents into each edge
        for i in range(n - 1, 0, -1):
            cur[par[i]] += cur[i]
        # forward: propagate voltage drops from the root
        ok = True
        for i in range(1, n):
            vi = v[par[i]] - zz[i] * cur[i]
            if vi == 0j or not (math.isfinite(vi.real) and math.isfinite(vi.imag)):
                ok = False
                break
            v[i] = vi
        if not ok:
            mismatch = math.inf
            break
        # nodal power implied by the solved currents vs. the specification
        mismatch = max(
            (abs(ss[i] - v[i] * inj[i].conjugate()) for i in range(1, n)),
            default=0.0,
        )
        if mismatch < tol:
            converged = True
            break

    return (
        np.asarray(v, dtype=np.complex128),
        np.asarray(cur, dtype=np.complex128),
        iterations,
        converged,
        mismatch,
    )
