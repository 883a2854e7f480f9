# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled grouped log-sum-exp kernels (hot loop of the simulator)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()


def grouped_logsumexp_equal(double[::1] vals, Py_ssize_t m, out=None):
    cdef Py_ssize_t groups = vals.shape[0] // m
    if out is None:
        out = np.empty(groups, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t g, j, base
    cdef double mx, acc
    with nogil:
        for g in range(groups):
            base = g * m
            mx = vals[base]
            for j in range(1, m):
                if vals[base + j] > mx:
                    mx = vals[base + j]
            acc = 0.0
            for j in range(m):
                acc += exp(vals[base + j] - mx)
            res[g] = mx + log(acc)
    return out


def grouped_logsumexp(double[::1] vals, cnp.int64_t[::1] offsets, out=None):
    cdef Py_ssize_t groups = offsets.shape[0] - 1
    if out is None:
        out = np.empty(groups, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t g, j, lo, hi
    cdef double mx, acc
    with nogil:
        for g in range(groups):
            lo = offsets[g]
            hi = offsets[g + 1]
            mx = vals[lo]
            for j in range(lo + 1, hi):
                if vals[j] > mx:
                    mx = vals[j]
            acc = 0.0
            for j in range(lo, hi):
                acc += exp(vals[j] - mx)
            res[g] = mx + log(acc)
    return out
