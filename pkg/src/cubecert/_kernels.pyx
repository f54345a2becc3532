# cython: language_level=3
"""Compiled hot loops: l1 distances to point sets, the hat function, grid chunks.

Every routine performs the same floating-point operations in the same order
as its counterpart in ``_kernels_py`` so both backends agree bit for bit.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, fmod, INFINITY

cnp.import_array()

SNAP = 1e-12


cdef inline double _dist_one(const double[:, ::1] x, Py_ssize_t a,
                             const double[:, ::1] p, Py_ssize_t n,
                             Py_ssize_t d, bint periodic) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double best = INFINITY
    cdef double acc, t
    for i in range(n):
        acc = 0.0
        for j in range(d):
            t = fabs(x[a, j] - p[i, j])
            if periodic:
                if t >= 1.0:  # fmod is the identity below 1
                    t = fmod(t, 1.0)
                if t > 0.5:
                    t = 1.0 - t
            acc += t
            if acc >= best:
                break
        if acc < best:
            best = acc
    return best


def min_l1_dist(points, nodes, bint periodic=False):
    """Minimum l1 distance from each row of ``points`` to the rows of ``nodes``."""
    cdef const double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] p = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef Py_ssize_t k = x.shape[0], d = x.shape[1], n = p.shape[0]
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t a
    with nogil:
        for a in range(k):
            o[a] = _dist_one(x, a, p, n, d, periodic)
    return out


def hat_values(points, nodes, double rho, bint periodic=False):
    """Clipped ramp min(1, max(0, dist - rho) / rho), snapped at both ends."""
    cdef const double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[:, ::1] p = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef Py_ssize_t k = x.shape[0], d = x.shape[1], n = p.shape[0]
    out = np.empty(k, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t a
    cdef double excess
    cdef double lo = rho * SNAP
    cdef double hi = rho * (1.0 - SNAP)
    with nogil:
        for a in range(k):
            excess = _dist_one(x, a, p, n, d, periodic) - rho
            if excess <= lo:
                o[a] = 0.0
            elif excess >= hi:
                o[a] = 1.0
            else:
                o[a] = excess / rho
    return out


def grid_chunk(nodes, weights, Py_ssize_t d, long long start, Py_ssize_t count):
    """Points and product weights for linear indices ``start .. start+count-1``.

    Multi-indices run in lexicographic order with the last axis fastest.
    """
    cdef const double[::1] xs = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] ws = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t m = xs.shape[0]
    pts = np.empty((count, d), dtype=np.float64)
    wts = np.empty(count, dtype=np.float64)
    cdef double[:, ::1] P = pts
    cdef double[::1] W = wts
    cdef Py_ssize_t[::1] idx = np.zeros(d, dtype=np.intp)
    cdef long long rem = start
    cdef Py_ssize_t a, j
    cdef double w
    for j in range(d - 1, -1, -1):
        idx[j] = rem % m
        rem //= m
    with nogil:
        for a in range(count):
            w = 1.0
            for j in range(d):
                P[a, j] = xs[idx[j]]
                w = w * ws[idx[j]]
            W[a] = w
            j = d - 1
            while j >= 0:
                idx[j] += 1
                if idx[j] < m:
                    break
                idx[j] = 0
                j -= 1
    return pts, wts
