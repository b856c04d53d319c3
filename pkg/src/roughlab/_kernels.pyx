# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled pair-scan and summation kernels.

Every function here has a numpy twin in ``_kernels_py`` with the same
signature; ``roughlab.kernels`` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs

cnp.import_array()


cdef inline double _inv_w2(const double[::1] t, const double[::1] lag,
                           Py_ssize_t i, Py_ssize_t j, double expo) noexcept nogil:
    cdef double dt
    if lag.shape[0] > 0:
        return lag[j - i]
    dt = t[j] - t[i]
    return 1.0 / pow(dt, 2.0 * expo)


def holder_increment(const double[:, ::1] v, const double[::1] t,
                     double expo, const double[::1] lag):
    """max_{i<j} |v_j - v_i| / (t_j - t_i)^expo."""
    cdef Py_ssize_t n1 = v.shape[0], k = v.shape[1]
    cdef Py_ssize_t i, j, c
    cdef double best = 0.0, acc, diff, r, vi
    cdef bint uniform = lag.shape[0] > 0
    with nogil:
        if k == 1 and uniform:
            for i in range(n1 - 1):
                vi = v[i, 0]
                for j in range(i + 1, n1):
                    diff = v[j, 0] - vi
                    r = diff * diff * lag[j - i]
                    best = r if r > best else best
        else:
            for i in range(n1 - 1):
                for j in range(i + 1, n1):
                    acc = 0.0
                    for c in range(k):
                        diff = v[j, c] - v[i, c]
                        acc += diff * diff
                    r = acc * _inv_w2(t, lag, i, j, expo)
                    best = r if r > best else best
    return sqrt(best)


def holder_remainder(const double[:, ::1] dv, const double[:, :, ::1] yp,
                     const double[:, ::1] x, const double[:, :, ::1] yp2,
                     const double[:, ::1] x2, bint has2,
                     const double[::1] t, double expo, const double[::1] lag):
    """max_{i<j} |dv_ij - yp_i x_ij + yp2_i x2_ij| / (t_j - t_i)^expo.

    ``has2`` switches the second expansion off (single-path remainder).
    """
    cdef Py_ssize_t n1 = dv.shape[0], k = dv.shape[1], d = x.shape[1]
    cdef Py_ssize_t i, j, c, e
    cdef double best = 0.0, acc, val, r, a, b, dvi, xi, x2i
    cdef bint uniform = lag.shape[0] > 0
    with nogil:
        if k == 1 and d == 1 and uniform:
            # scalar fast path, the common case for one-dimensional solves
            for i in range(n1 - 1):
                a = yp[i, 0, 0]
                b = yp2[i, 0, 0] if has2 else 0.0
                dvi = dv[i, 0]
                xi = x[i, 0]
                x2i = x2[i, 0] if has2 else 0.0
                if has2:
                    for j in range(i + 1, n1):
                        val = (dv[j, 0] - dvi) - (a * (x[j, 0] - xi) - b * (x2[j, 0] - x2i))
                        r = val * val * lag[j - i]
                        best = r if r > best else best
                else:
                    for j in range(i + 1, n1):
                        val = (dv[j, 0] - dvi) - a * (x[j, 0] - xi)
                        r = val * val * lag[j - i]
                        best = r if r > best else best
        else:
            for i in range(n1 - 1):
                for j in range(i + 1, n1):
                    acc = 0.0
                    for c in range(k):
                        val = dv[j, c] - dv[i, c]
                        if has2:
                            # paired per component so identical inputs cancel exactly
                            for e in range(d):
                                val -= (yp[i, c, e] * (x[j, e] - x[i, e])
                                        - yp2[i, c, e] * (x2[j, e] - x2[i, e]))
                        else:
                            for e in range(d):
                                val -= yp[i, c, e] * (x[j, e] - x[i, e])
                        acc += val * val
                    r = acc * _inv_w2(t, lag, i, j, expo)
                    best = r if r > best else best
    return sqrt(best)


def holder_area(const double[:, ::1] x, const double[:, :, ::1] xx,
                const double[:, ::1] x2, const double[:, :, ::1] xx2, bint has2,
                const double[::1] t, double expo, const double[::1] lag):
    """max_{i<j} |A_ij - B_ij| / (t_j - t_i)^expo with A, B Chen-chained areas."""
    cdef Py_ssize_t n1 = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, p, q
    cdef double best = 0.0, acc, val, r
    cdef double[:, ::1] a = np.zeros((d, d))
    cdef double[:, ::1] b = np.zeros((d, d))
    cdef double sa, sb, xi, x2i
    if d == 1 and lag.shape[0] > 0:
        with nogil:
            for i in range(n1 - 1):
                sa = 0.0
                sb = 0.0
                xi = x[i, 0]
                x2i = x2[i, 0]
                for j in range(i, n1 - 1):
                    sa += xx[j, 0, 0] + (x[j, 0] - xi) * (x[j + 1, 0] - x[j, 0])
                    if has2:
                        sb += xx2[j, 0, 0] + (x2[j, 0] - x2i) * (x2[j + 1, 0] - x2[j, 0])
                    val = sa - sb
                    r = val * val * lag[j + 1 - i]
                    best = r if r > best else best
        return sqrt(best)
    with nogil:
        for i in range(n1 - 1):
            for p in range(d):
                for q in range(d):
                    a[p, q] = 0.0
                    b[p, q] = 0.0
            for j in range(i, n1 - 1):
                # extend [t_i, t_j] by cell j
                acc = 0.0
                for p in range(d):
                    for q in range(d):
                        a[p, q] += xx[j, p, q] + (x[j, p] - x[i, p]) * (x[j + 1, q] - x[j, q])
                        if has2:
                            b[p, q] += xx2[j, p, q] + (x2[j, p] - x2[i, p]) * (x2[j + 1, q] - x2[j, q])
                        val = a[p, q] - b[p, q]
                        acc += val * val
                r = acc * _inv_w2(t, lag, i, j + 1, expo)
                if r > best:
                    best = r
    return sqrt(best)


def neumaier_cumsum(const double[:, ::1] terms):
    """Running compensated sums; row 0 of the result is zero."""
    cdef Py_ssize_t n = terms.shape[0], k = terms.shape[1]
    cdef Py_ssize_t i, c
    out_arr = np.zeros((n + 1, k))
    cdef double[:, ::1] out = out_arr
    cdef double[::1] s = np.zeros(k)
    cdef double[::1] comp = np.zeros(k)
    cdef double v, tsum
    with nogil:
        for i in range(n):
            for c in range(k):
                v = terms[i, c]
                tsum = s[c] + v
                if fabs(s[c]) >= fabs(v):
                    comp[c] += (s[c] - tsum) + v
                else:
                    comp[c] += (v - tsum) + s[c]
                s[c] = tsum
                out[i + 1, c] = s[c] + comp[c]
    return out_arr
