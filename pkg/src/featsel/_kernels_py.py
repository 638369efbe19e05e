"""Numpy fallback implementations of the hot kernels.

This module mirrors the API of the compiled ``featsel._core`` extension.
Which one is active is decided in ``featsel.backend``.

Contract shared by both implementations:

* ``xoshiro_normals`` consumes the identical uint64 stream and produces
  bit-identical doubles (same Box-Muller arithmetic, same libm).
* ``class_column_moments`` accumulates sums in row order, so its means and
  squared deviations are bit-identical to a sequential scalar loop.
* ``fit_gaussian`` / ``predict_gaussian`` agree with the compiled core to
  floating-point roundoff (~1e-12 in discriminant scores); the factorization
  backends differ (LAPACK here, a hand Cholesky in the core), so bit
  equality is not promised across backends, only within one.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular

from ._kernels_common import KernelSingularError

_MASK64 = (1 << 64) - 1
_TWO_PI = math.tau
_P53 = 2.0**-53

name = "python"
compiled = False


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK64


def xoshiro_normals(s0, s1, s2, s3, count):
    """Fill ``count`` standard normals from a xoshiro256** state.

    Returns ``(values, new_state)``.  Pairs of outputs consume two draws;
    an odd tail still consumes two.
    """
    out = np.empty(count, dtype=np.float64)
    i = 0
    while i < count:
        r1 = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        r2 = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        u1 = ((r1 >> 11) + 1) * _P53
        u2 = ((r2 >> 11) + 1) * _P53
        radius = math.sqrt(-2.0 * math.log(u1))
        theta = _TWO_PI * u2
        out[i] = radius * math.cos(theta)
        if i + 1 < count:
            out[i + 1] = radius * math.sin(theta)
        i += 2
    return out, (s0, s1, s2, s3)


def class_column_moments(values, rows):
    """Per-column mean and sum of squared deviations over ``rows``.

    Two-pass, accumulated in row order so the result matches a sequential
    scalar implementation bit for bit.
    """
    rows = np.asarray(rows, dtype=np.int64)
    d = values.shape[1]
    acc = np.zeros(d, dtype=np.float64)
    for r in rows:
        acc += values[r]
    mean = acc / len(rows)
    ssd = np.zeros(d, dtype=np.float64)
    for r in rows:
        dx = values[r] - mean
        ssd += dx * dx
    return mean, ssd


def fit_gaussian(x, y, n_classes, pooled, ridge):
    """Fit per-class means and covariance Cholesky factors.

    ``x`` is (n, d) float64, ``y`` (n,) int64 with values in [0, n_classes).
    Returns ``(means, chols, log_dets, counts)`` where ``chols`` has shape
    (1, d, d) for a pooled covariance and (n_classes, d, d) otherwise.
    Divisors: n - n_classes pooled, n_c - 1 per class.  ``ridge`` * I is
    added before factorization.
    """
    n, d = x.shape
    counts = np.bincount(y, minlength=n_classes).astype(np.int64)
    means = np.zeros((n_classes, d), dtype=np.float64)
    for c in range(n_classes):
        means[c] = x[y == c].sum(axis=0) / counts[c]

    eye = np.eye(d)
    if pooled:
        scatter = np.zeros((d, d), dtype=np.float64)
        for c in range(n_classes):
            xc = x[y == c] - means[c]
            scatter += xc.T @ xc
        cov = scatter / (n - n_classes) + ridge * eye
        chols = np.empty((1, d, d), dtype=np.float64)
        chols[0] = _cholesky(cov, -1)
        log_dets = np.array([2.0 * np.log(np.diag(chols[0])).sum()])
    else:
        chols = np.empty((n_classes, d, d), dtype=np.float64)
        log_dets = np.empty(n_classes, dtype=np.float64)
        for c in range(n_classes):
            xc = x[y == c] - means[c]
            cov = (xc.T @ xc) / (counts[c] - 1) + ridge * eye
            chols[c] = _cholesky(cov, c)
            log_dets[c] = 2.0 * np.log(np.diag(chols[c])).sum()
    return means, chols, log_dets, counts


def _cholesky(cov, class_index):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise KernelSingularError(class_index) from None


def predict_gaussian(x, means, chols, log_dets, log_priors):
    """Argmax-class predictions for rows of ``x``.

    Scores are -0.5*log det - 0.5*Mahalanobis^2 + log prior, computed via
    triangular solves against the stored Cholesky factors.  Exact score
    ties resolve to the lower class id (first maximum).
    """
    n_classes = means.shape[0]
    pooled = chols.shape[0] == 1
    scores = np.empty((n_classes, x.shape[0]), dtype=np.float64)
    for c in range(n_classes):
        factor = chols[0] if pooled else chols[c]
        log_det = log_dets[0] if pooled else log_dets[c]
        z = solve_triangular(
            factor, (x - means[c]).T, lower=True, check_finite=False
        )
        scores[c] = -0.5 * log_det - 0.5 * (z * z).sum(axis=0) + log_priors[c]
    return np.argmax(scores, axis=0).astype(np.int64)
