# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched small-matrix solve with partial pivoting.

Same contract as ``_pysolve.solve_batch``; this version runs the per-node
elimination in C and is the hot kernel of the transform pipeline.
"""

import numpy as np


cdef inline double _mag2(double complex v) noexcept:
    return v.real * v.real + v.imag * v.imag


cdef double complex _factor_solve(double complex[:, ::1] w, double complex[:, ::1] r,
                                  Py_ssize_t n, Py_ssize_t k, double complex cnan) noexcept:
    """LU-factor ``w`` in place and overwrite the ``k`` columns of ``r`` with solutions."""
    cdef Py_ssize_t c, i, j, p
    cdef double best, cand
    cdef double complex det = 1.0
    cdef double complex piv, lam, tmp
    for c in range(n):
        p = c
        best = _mag2(w[c, c])
        for i in range(c + 1, n):
            cand = _mag2(w[i, c])
            if cand > best:
                best = cand
                p = i
        if p != c:
            det = -det
            for j in range(n):
                tmp = w[c, j]; w[c, j] = w[p, j]; w[p, j] = tmp
            for j in range(k):
                tmp = r[c, j]; r[c, j] = r[p, j]; r[p, j] = tmp
        piv = w[c, c]
        det = det * piv
        for i in range(c + 1, n):
            if piv != 0:
                lam = w[i, c] / piv
            else:
                lam = 0.0
            w[i, c] = 0.0
            if lam != 0:
                for j in range(c + 1, n):
                    w[i, j] = w[i, j] - lam * w[c, j]
                for j in range(k):
                    r[i, j] = r[i, j] - lam * r[c, j]
    if det == 0:
        for i in range(n):
            for j in range(k):
                r[i, j] = cnan
        return det
    for c in range(n - 1, -1, -1):
        for j in range(k):
            tmp = r[c, j]
            for i in range(c + 1, n):
                tmp = tmp - w[c, i] * r[i, j]
            r[c, j] = tmp / w[c, c]
    return det


def solve_batch(a, b=None, bt=None):
    """Solve a batch of small dense complex systems by pivoted elimination.

    See ``moutard.kernels`` for the shared contract.
    """
    a_arr = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t m = a_arr.shape[0]
    cdef Py_ssize_t n = a_arr.shape[1]
    cdef Py_ssize_t kb = 0, kt = 0

    x_arr = None
    xt_arr = None
    if b is not None:
        x_arr = np.array(b, dtype=np.complex128, order="C")
        kb = x_arr.shape[2]
    if bt is not None:
        xt_arr = np.array(bt, dtype=np.complex128, order="C")
        kt = xt_arr.shape[2]
    det_arr = np.empty(m, dtype=np.complex128)
    scratch = np.empty((n, n), dtype=np.complex128)
    empty_rhs = np.empty((n, 0), dtype=np.complex128)

    cdef double complex[:, :, ::1] av = a_arr
    cdef double complex[:, ::1] w = scratch
    cdef double complex[:, :, ::1] xv = x_arr if x_arr is not None else np.empty((m, n, 0), dtype=np.complex128)
    cdef double complex[:, :, ::1] xtv = xt_arr if xt_arr is not None else np.empty((m, n, 0), dtype=np.complex128)
    cdef double complex[:, ::1] rhs
    cdef double complex[::1] detv = det_arr
    cdef double complex cnan = complex(float("nan"), float("nan"))
    cdef double complex[:, ::1] empty = empty_rhs
    cdef Py_ssize_t node, i, j
    cdef double complex dt

    for node in range(m):
        for i in range(n):
            for j in range(n):
                w[i, j] = av[node, i, j]
        rhs = xv[node] if kb else empty
        detv[node] = _factor_solve(w, rhs, n, kb, cnan)
        if kt:
            for i in range(n):
                for j in range(n):
                    w[i, j] = av[node, j, i]
            rhs = xtv[node]
            dt = _factor_solve(w, rhs, n, kt, cnan)
    return x_arr, xt_arr, det_arr
