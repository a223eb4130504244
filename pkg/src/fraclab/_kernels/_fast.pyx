# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Contract mirrors ``fraclab._kernels._ref``; the package-level wrappers
normalize dtypes and shapes before calling in.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

BACKEND = "compiled"


def ramp01(cnp.ndarray[cnp.float64_t, ndim=1] t):
    cdef Py_ssize_t i, m = t.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double ti, b1, b2
    for i in range(m):
        ti = t[i]
        if ti <= 1.0:
            out[i] = 0.0
        elif ti >= 2.0:
            out[i] = 1.0
        else:
            b1 = exp(-1.0 / (ti - 1.0))
            b2 = exp(-1.0 / (2.0 - ti))
            out[i] = b1 / (b1 + b2)
    return out


def dist_segment(cnp.ndarray[cnp.float64_t, ndim=2] points,
                 cnp.ndarray[cnp.float64_t, ndim=1] a,
                 cnp.ndarray[cnp.float64_t, ndim=1] b):
    cdef Py_ssize_t i, j, m = points.shape[0], n = points.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double denom = 0.0, t, acc, d
    for j in range(n):
        denom += (b[j] - a[j]) * (b[j] - a[j])
    for i in range(m):
        if denom == 0.0:
            t = 0.0
        else:
            t = 0.0
            for j in range(n):
                t += (points[i, j] - a[j]) * (b[j] - a[j])
            t /= denom
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        acc = 0.0
        for j in range(n):
            d = points[i, j] - (a[j] + t * (b[j] - a[j]))
            acc += d * d
        out[i] = sqrt(acc)
    return out


def dist_circle3d(cnp.ndarray[cnp.float64_t, ndim=2] points, double radius):
    cdef Py_ssize_t i, m = points.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double rho, dz
    for i in range(m):
        rho = sqrt(points[i, 0] * points[i, 0] + points[i, 1] * points[i, 1]) - radius
        dz = points[i, 2]
        out[i] = sqrt(rho * rho + dz * dz)
    return out


def dist_point_cloud(cnp.ndarray[cnp.float64_t, ndim=2] points,
                     cnp.ndarray[cnp.float64_t, ndim=2] cloud):
    cdef Py_ssize_t i, j, q, m = points.shape[0], k = cloud.shape[0], n = points.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double best, acc, d
    for i in range(m):
        best = -1.0
        for q in range(k):
            acc = 0.0
            for j in range(n):
                d = points[i, j] - cloud[q, j]
                acc += d * d
            if best < 0.0 or acc < best:
                best = acc
        out[i] = sqrt(best)
    return out
