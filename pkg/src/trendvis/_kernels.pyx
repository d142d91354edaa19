# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_kernels_py`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log10, pow

cnp.import_array()

BACKEND = "cython"


cdef void _weights(double d, Py_ssize_t r_cap, double[::1] w) noexcept nogil:
    cdef Py_ssize_t r
    for r in range(r_cap):
        w[r] = pow(<double>(r + 1), -d)


def rank_weights(double d, Py_ssize_t r_cap):
    w = np.empty(r_cap)
    _weights(d, r_cap, w)
    return w


def visibility_matrix(hist, grid):
    cdef double[:, ::1] h = np.ascontiguousarray(hist, dtype=np.float64)
    cdef double[::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef Py_ssize_t n = h.shape[0], r_cap = h.shape[1], m = g.shape[0]
    out_arr = np.empty((m, n))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] w = np.empty(r_cap)
    cdef Py_ssize_t i, k, r
    cdef double v
    with nogil:
        for k in range(m):
            _weights(g[k], r_cap, w)
            for i in range(n):
                v = 0.0
                for r in range(r_cap):
                    v += h[i, r] * w[r]
                out[k, i] = v
    return out_arr


def loglog_sweep(hist, y, grid):
    cdef double[:, ::1] h = np.ascontiguousarray(hist, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] g = np.ascontiguousarray(grid, dtype=np.float64)
    cdef Py_ssize_t n = h.shape[0], r_cap = h.shape[1], m = g.shape[0]
    cdef double[::1] w = np.empty(r_cap)
    cdef double[::1] x = np.empty(n)
    cdef double[::1] dy = np.empty(n)
    xbar_a, sxx_a, sxy_a, xspan_a = np.empty(m), np.empty(m), np.empty(m), np.empty(m)
    cdef double[::1] xbar = xbar_a, sxx = sxx_a, sxy = sxy_a, xspan = xspan_a
    cdef Py_ssize_t i, k, r
    cdef double v, s, ybar, mean, dx, a, b, lo, hi
    with nogil:
        s = 0.0
        for i in range(n):
            s += yv[i]
        ybar = s / n
        for i in range(n):
            dy[i] = yv[i] - ybar
        for k in range(m):
            _weights(g[k], r_cap, w)
            s = 0.0
            for i in range(n):
                v = 0.0
                for r in range(r_cap):
                    v += h[i, r] * w[r]
                x[i] = log10(v)
                s += x[i]
            mean = s / n
            a = 0.0
            b = 0.0
            lo = x[0]
            hi = x[0]
            for i in range(n):
                dx = x[i] - mean
                a += dx * dx
                b += dx * dy[i]
                if x[i] < lo:
                    lo = x[i]
                if x[i] > hi:
                    hi = x[i]
            xbar[k] = mean
            sxx[k] = a
            sxy[k] = b
            xspan[k] = hi - lo
    return xbar_a, sxx_a, sxy_a, xspan_a
