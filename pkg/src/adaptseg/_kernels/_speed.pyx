# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the per-region pixel kernels.

Semantics match ``_reference`` exactly for integer-valued data (all
accumulations of 8-bit-derived values are exact in double precision);
``abs_dev_sum`` may differ from the numpy fallback in the last bits.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"


def stats_1d(double[::1] plane, cnp.int64_t[::1] idx):
    cdef Py_ssize_t j, n = idx.shape[0]
    cdef double v, s1 = 0.0, s2 = 0.0
    cdef double mn = plane[idx[0]], mx = plane[idx[0]]
    for j in range(n):
        v = plane[idx[j]]
        s1 += v
        s2 += v * v
        if v < mn:
            mn = v
        if v > mx:
            mx = v
    return s1, s2, mn, mx


def abs_dev_sum(double[::1] plane, cnp.int64_t[::1] idx, double mean):
    cdef Py_ssize_t j, n = idx.shape[0]
    cdef double d, total = 0.0
    for j in range(n):
        d = mean - plane[idx[j]]
        total += d if d >= 0.0 else -d
    return total


def sign_mask(double[::1] plane, cnp.int64_t[::1] idx, double mean):
    cdef Py_ssize_t j, n = idx.shape[0]
    out = np.empty(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] mv = out
    for j in range(n):
        mv[j] = 1 if plane[idx[j]] <= mean else 0
    return out


def masked_sum(double[::1] plane, cnp.int64_t[::1] idx, cnp.uint8_t[::1] mask):
    cdef Py_ssize_t j, n = idx.shape[0]
    cdef double total = 0.0
    for j in range(n):
        if mask[j]:
            total += plane[idx[j]]
    return total


def bbox(cnp.int64_t[::1] idx, long long width):
    cdef Py_ssize_t j, n = idx.shape[0]
    cdef long long r, c, i
    cdef long long r0, r1, c0, c1
    i = idx[0]
    r0 = r1 = i // width
    c0 = c1 = i % width
    for j in range(1, n):
        i = idx[j]
        r = i // width
        c = i % width
        if r < r0:
            r0 = r
        elif r > r1:
            r1 = r
        if c < c0:
            c0 = c
        elif c > c1:
            c1 = c
    return r0, r1, c0, c1


def coord_counts(cnp.int64_t[::1] idx, long long width, int axis,
                 long long lo, Py_ssize_t nbins):
    cdef Py_ssize_t j, n = idx.shape[0]
    out = np.zeros(nbins, dtype=np.int64)
    cdef cnp.int64_t[::1] ov = out
    if axis == 0:
        for j in range(n):
            ov[idx[j] // width - lo] += 1
    else:
        for j in range(n):
            ov[idx[j] % width - lo] += 1
    return out


def coord_sums(double[::1] plane, cnp.int64_t[::1] idx, long long width,
               int axis, long long lo, Py_ssize_t nbins):
    cdef Py_ssize_t j, n = idx.shape[0]
    out = np.zeros(nbins, dtype=np.float64)
    cdef double[::1] ov = out
    if axis == 0:
        for j in range(n):
            ov[idx[j] // width - lo] += plane[idx[j]]
    else:
        for j in range(n):
            ov[idx[j] % width - lo] += plane[idx[j]]
    return out
