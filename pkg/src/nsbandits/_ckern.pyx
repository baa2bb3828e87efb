# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Matérn kernel backend.

Fused distance + covariance evaluation without the intermediate arrays the
NumPy fallback allocates.  Mirrors ``nsbandits._nkern``.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

cdef double SQRT3 = sqrt(3.0)
cdef double SQRT5 = sqrt(5.0)


cdef inline double _k(int case, double r) noexcept nogil:
    cdef double s
    if case == 0:
        return exp(-r)
    elif case == 1:
        s = SQRT3 * r
        return (1.0 + s) * exp(-s)
    else:
        s = SQRT5 * r
        return (1.0 + s + s * s / 3.0) * exp(-s)


cdef inline double _dist(const double[:, ::1] X, const double[:, ::1] Y,
                         Py_ssize_t i, Py_ssize_t j, Py_ssize_t d) noexcept nogil:
    cdef double acc = 0.0, diff
    cdef Py_ssize_t k
    for k in range(d):
        diff = X[i, k] - Y[j, k]
        acc += diff * diff
    return sqrt(acc)


def cross(int case, double inv_l, double[:, ::1] X, double[:, ::1] Y):
    """Cross-covariance matrix k(X_i, Y_j), shape (n, m)."""
    if case < 0 or case > 2:
        raise ValueError(f"unknown Matérn case {case}")
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], d = X.shape[1]
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(m):
                out[i, j] = _k(case, _dist(X, Y, i, j, d) * inv_l)
    return out_arr


def gram(int case, double inv_l, double[:, ::1] X, double diag_add):
    """Symmetric covariance matrix k(X_i, X_j) + diag_add * I."""
    if case < 0 or case > 2:
        raise ValueError(f"unknown Matérn case {case}")
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    out_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double v
    with nogil:
        for i in range(n):
            out[i, i] = 1.0 + diag_add
            for j in range(i + 1, n):
                v = _k(case, _dist(X, X, i, j, d) * inv_l)
                out[i, j] = v
                out[j, i] = v
    return out_arr
