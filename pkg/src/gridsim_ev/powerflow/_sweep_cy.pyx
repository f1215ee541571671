# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled backward/forward sweep kernel (same contract as _sweep_py)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def run_sweep(cnp.int32_t[::1] parent,
              cnp.complex128_t[::1] z,
              cnp.complex128_t[::1] s,
              double complex v_slack,
              double tol,
              int max_iter):
    cdef Py_ssize_t n = parent.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] v_arr = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] cur_arr = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] inj_arr = np.empty(n, dtype=np.complex128)
    cdef cnp.complex128_t[::1] v = v_arr
    cdef cnp.complex128_t[::1] cur = cur_arr
    cdef cnp.complex128_t[::1] inj = inj_arr

    cdef Py_ssize_t i
    cdef int iterations = 0
    cdef bint converged = False
    cdef bint ok
    cdef double mismatch = float("inf")
    cdef double m
    cdef double complex vi, residual

    for i in range(n):
        v[i] = v_slack

    while iterations < max_iter:
        iterations += 1
        inj[0] = 0
        for i in range(1, n):
            vi = v[i]
            inj[i] = (s[i] / vi).conjugate()
        for i in range(n):
            cur[i] = inj[i]
        for i in range(n - 1, 0, -1):
            cur[parent[i]] = cur[parent[i]] + cur[i]
        ok = True
        for i in range(1, n):
            vi = v[parent[i]] - z[i] * cur[i]
            if vi == 0 or vi != vi:  # zero or NaN voltage: collapse
                ok = False
                break
            v[i] = vi
        if not ok:
            mismatch = float("inf")
            break
        mismatch = 0.0
        for i in range(1, n):
            residual = s[i] - v[i] * inj[i].conjugate()
            m = abs(residual)
            if m > mismatch:
                mismatch = m
        if mismatch < tol:
            converged = True
            break

    return v_arr, cur_arr, iterations, converged, mismatch
