# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts and rounding as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

NAME = "cython"

cdef enum:
    CA0 = 0
    CAHALF = 1
    CA1 = 2

A0, AHALF, A1 = CA0, CAHALF, CA1


cdef inline bint _eq(double a, double b, double rtol) nogil:
    cdef double fa = fabs(a), fb = fabs(b)
    return fabs(a - b) <= rtol * (fa if fa > fb else fb)


def odot(const double[:, :] F, const double[:, :] G):
    cdef Py_ssize_t m = F.shape[0], n = F.shape[1], p = G.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, v, f
    out = np.zeros((m, p))
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(m):
            for k in range(n):
                f = F[i, k]
                if f == 0.0:
                    continue
                for j in range(p):
                    v = f * G[k, j]
                    if v > o[i, j]:
                        o[i, j] = v
    return out


def min_ratio_ties(const double[:, :] X, double rtol):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double m, r, thr
    cdef long long c
    mins = np.zeros((d, d))
    counts = np.zeros((d, d), dtype=np.int64)
    cdef double[:, ::1] mv = mins
    cdef long long[:, ::1] cv = counts
    with nogil:
        for j in range(d):
            for i in range(d):
                if i == j:
                    continue
                m = X[0, i] / X[0, j]
                for t in range(1, n):
                    r = X[t, i] / X[t, j]
                    if r < m:
                        m = r
                thr = m * (1.0 + rtol)
                c = 0
                for t in range(n):
                    if X[t, i] / X[t, j] <= thr:
                        c += 1
                mv[j, i] = m
                cv[j, i] = c
    return mins, counts


def node_labels(const double[:, :] X, const double[:, :] B,
                const double[:, :] Bstar, parent_mask, double rtol):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t t, i, k
    cdef double m, ms, xi, top, v
    cdef bint eq_m, eq_ms, zero, half
    cdef const unsigned char[:, :] pm = np.ascontiguousarray(parent_mask, dtype=np.uint8)
    labels = np.empty((n, d), dtype=np.int8)
    cdef signed char[:, ::1] lv = labels
    with nogil:
        for t in range(n):
            for i in range(d):
                m = 0.0
                ms = 0.0
                for k in range(d):
                    if pm[k, i]:
                        v = B[k, i] * X[t, k]
                        if v > m:
                            m = v
                        v = Bstar[k, i] * X[t, k]
                        if v > ms:
                            ms = v
                xi = X[t, i]
                eq_m = _eq(xi, m, rtol)
                eq_ms = _eq(xi, ms, rtol)
                zero = (xi < m and not eq_m) or (eq_ms and ms > m and not _eq(ms, m, rtol))
                top = m if m > ms else ms
                half = (eq_m and eq_ms) or (xi > top and not _eq(xi, top, rtol))
                if zero:
                    lv[t, i] = CA0
                elif half:
                    lv[t, i] = CAHALF
                else:
                    lv[t, i] = CA1
    return labels


def classify_rows(const double[:, :] X, const double[:, :] B,
                  const double[:, :] Bstar, parent_mask, double rtol):
    labels = node_labels(X, B, Bstar, parent_mask, rtol)
    cdef signed char[:, ::1] lv = labels
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t t, i
    cdef bint all_half
    region = np.empty(n, dtype=np.int8)
    witness = np.full(n, -1, dtype=np.int64)
    cdef signed char[::1] rv = region
    cdef long long[::1] wv = witness
    with nogil:
        for t in range(n):
            all_half = True
            rv[t] = CA1
            for i in range(d):
                if lv[t, i] == CA0:
                    rv[t] = CA0
                    wv[t] = i
                    break
                if lv[t, i] != CAHALF:
                    all_half = False
            if rv[t] != CA0 and all_half:
                rv[t] = CAHALF
    return region, witness
