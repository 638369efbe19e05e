# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: bulk normals, column moments, discriminant fit/predict.

Mirrors the API and numeric contract of ``featsel._kernels_py``; see that
module for the details of what matches bit-for-bit across backends.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, log, sin, sqrt
from libc.stdint cimport int64_t, uint64_t

from ._kernels_common import KernelSingularError

cnp.import_array()

name = "c"
compiled = True

cdef double TWO_PI = 6.283185307179586476925287
cdef double P53 = 1.0 / 9007199254740992.0  # 2**-53


cdef inline uint64_t _rotl(uint64_t x, int k) nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _xoshiro_next(uint64_t* s) nogil:
    cdef uint64_t result = _rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def xoshiro_normals(s0, s1, s2, s3, Py_ssize_t count):
    """Fill ``count`` standard normals; returns ``(values, new_state)``."""
    out = np.empty(count, dtype=np.float64)
    cdef double[::1] o = out
    cdef uint64_t s[4]
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    cdef Py_ssize_t i = 0
    cdef uint64_t r1, r2
    cdef double u1, u2, radius, theta
    with nogil:
        while i < count:
            r1 = _xoshiro_next(s)
            r2 = _xoshiro_next(s)
            u1 = <double>((r1 >> 11) + 1) * P53
            u2 = <double>((r2 >> 11) + 1) * P53
            radius = sqrt(-2.0 * log(u1))
            theta = TWO_PI * u2
            o[i] = radius * cos(theta)
            if i + 1 < count:
                o[i + 1] = radius * sin(theta)
            i += 2
    return out, (s[0], s[1], s[2], s[3])


def class_column_moments(const double[:, :] values, const int64_t[::1] rows):
    """Per-column mean and sum of squared deviations, accumulated in row order."""
    cdef Py_ssize_t d = values.shape[1]
    cdef Py_ssize_t m = rows.shape[0]
    mean_arr = np.empty(d, dtype=np.float64)
    ssd_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] mean = mean_arr
    cdef double[::1] ssd = ssd_arr
    cdef Py_ssize_t j, r
    cdef double acc, mu, dx
    with nogil:
        for j in range(d):
            acc = 0.0
            for r in range(m):
                acc += values[rows[r], j]
            mu = acc / m
            acc = 0.0
            for r in range(m):
                dx = values[rows[r], j] - mu
                acc += dx * dx
            mean[j] = mu
            ssd[j] = acc
    return mean_arr, ssd_arr


cdef int _cholesky_inplace(double[:, :, ::1] a, Py_ssize_t t, Py_ssize_t d) nogil:
    """Lower Cholesky of slot ``t`` in place (Banachiewicz); -1 if not PD."""
    cdef Py_ssize_t i, j, k
    cdef double acc
    for j in range(d):
        acc = a[t, j, j]
        for k in range(j):
            acc -= a[t, j, k] * a[t, j, k]
        if acc <= 0.0:
            return -1
        a[t, j, j] = sqrt(acc)
        for i in range(j + 1, d):
            acc = a[t, i, j]
            for k in range(j):
                acc -= a[t, i, k] * a[t, j, k]
            a[t, i, j] = acc / a[t, j, j]
    for j in range(d):
        for i in range(j + 1, d):
            a[t, j, i] = 0.0
    return 0


def fit_gaussian(const double[:, ::1] x, const int64_t[::1] y, int n_classes, bint pooled,
                 double ridge):
    """Fit per-class means and covariance Cholesky factors.

    Same divisors and ridge handling as the fallback: n - n_classes pooled,
    n_c - 1 per class, ridge * I added before factorization.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t n_chol = 1 if pooled else n_classes

    means_arr = np.zeros((n_classes, d), dtype=np.float64)
    counts_arr = np.zeros(n_classes, dtype=np.int64)
    chols_arr = np.zeros((n_chol, d, d), dtype=np.float64)
    log_dets_arr = np.empty(n_chol, dtype=np.float64)

    cdef double[:, ::1] means = means_arr
    cdef int64_t[::1] counts = counts_arr
    cdef double[:, :, ::1] chols = chols_arr
    cdef double[::1] log_dets = log_dets_arr

    dx_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] dx = dx_arr

    cdef Py_ssize_t r, i, j, c, target
    cdef double divisor, acc
    cdef int status = 0
    cdef Py_ssize_t bad_class = -2

    with nogil:
        for r in range(n):
            c = y[r]
            counts[c] += 1
            for j in range(d):
                means[c, j] += x[r, j]
        for c in range(n_classes):
            for j in range(d):
                means[c, j] /= counts[c]
        # scatter accumulation: row by row into the pooled or per-class slot
        for r in range(n):
            c = y[r]
            target = 0 if pooled else c
            for j in range(d):
                dx[j] = x[r, j] - means[c, j]
            for i in range(d):
                for j in range(i + 1):
                    chols[target, i, j] += dx[i] * dx[j]
        for target in range(n_chol):
            if pooled:
                divisor = n - n_classes
            else:
                divisor = counts[target] - 1
            for i in range(d):
                for j in range(i + 1):
                    chols[target, i, j] /= divisor
                    chols[target, j, i] = chols[target, i, j]
                chols[target, i, i] += ridge
            if _cholesky_inplace(chols, target, d) != 0:
                status = -1
                bad_class = -1 if pooled else target
                break
            acc = 0.0
            for i in range(d):
                acc += log(chols[target, i, i])
            log_dets[target] = 2.0 * acc

    if status != 0:
        raise KernelSingularError(bad_class)
    return means_arr, chols_arr, log_dets_arr, counts_arr


def predict_gaussian(const double[:, ::1] x, const double[:, ::1] means,
                     const double[:, :, ::1] chols, const double[::1] log_dets,
                     const double[::1] log_priors):
    """Argmax-class predictions; exact ties go to the lower class id."""
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t n_classes = means.shape[0]
    cdef bint pooled = chols.shape[0] == 1

    out_arr = np.empty(m, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    z_arr = np.empty(d, dtype=np.float64)
    cdef double[::1] z = z_arr

    cdef Py_ssize_t r, c, i, k, target, best
    cdef double acc, score, best_score, maha

    with nogil:
        for r in range(m):
            best = 0
            best_score = 0.0
            for c in range(n_classes):
                target = 0 if pooled else c
                maha = 0.0
                for i in range(d):
                    acc = x[r, i] - means[c, i]
                    for k in range(i):
                        acc -= chols[target, i, k] * z[k]
                    z[i] = acc / chols[target, i, i]
                    maha += z[i] * z[i]
                score = -0.5 * log_dets[target] - 0.5 * maha + log_priors[c]
                if c == 0 or score > best_score:
                    best = c
                    best_score = score
            out[r] = best
    return out_arr
