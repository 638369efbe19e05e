"""Univariate filter machinery: per-feature t-tests, ranking, ECDF.

The two-sided p-value of a t statistic with ``df`` degrees of freedom is
obtained exactly from the regularized incomplete beta function,

    p = I_x(df/2, 1/2)    with    x = df / (df + t**2),

so no CDF approximation enters the pipeline.  The default test is Welch's
(unequal variances, Welch-Satterthwaite degrees of freedom); a
pooled-variance variant is available behind a flag for comparison.

Zero-variance edge cases are given defined sentinel results instead of
propagating NaN: identical degenerate samples score t=0, p=1; perfectly
separated degenerate samples score p=0 with ``t = +/-sys.float_info.max``
standing in for infinite separation (keeps t finite and orderable).
"""

from __future__ import annotations

import sys
from bisect import bisect_right
from dataclasses import dataclass
from math import exp, lgamma, log, sqrt

import numpy as np

from . import backend
from .dataset import Dataset
from .errors import ValidationError

SEPARATION_SENTINEL = sys.float_info.max

_INCBETA_MAX_ITER = 500
_INCBETA_EPS = 1e-16
_INCBETA_TINY = 1e-300


@dataclass(frozen=True)
class TTestResult:
    """Two-sample t-test outcome for one feature."""

    feature_index: int
    t: float
    df: float
    p: float


@dataclass(frozen=True)
class EcdfCurve:
    """Empirical CDF of a sample; evaluates to (#values <= q) / n."""

    sorted_values: np.ndarray
    cumulative: np.ndarray

    def evaluate(self, q: float) -> float:
        n = len(self.sorted_values)
        return bisect_right(self.sorted_values, q) / n


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Continued fraction (modified Lentz), switching through the symmetry
    I_x(a,b) = 1 - I_{1-x}(b,a) when x > (a+1)/(a+b+2) so the fraction
    always converges fast.  Absolute error <= 1e-12 over the supported
    domain.
    """
    if not (a > 0 and b > 0):
        raise ValidationError(f"a and b must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(1.0 - x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return exp(ln_front) * _beta_cont_frac(a, b, x) / a
    return 1.0 - exp(ln_front) * _beta_cont_frac(b, a, 1.0 - x) / b


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the NR continued fraction for I_x(a,b)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _INCBETA_TINY:
        d = _INCBETA_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _INCBETA_MAX_ITER + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _INCBETA_TINY:
            d = _INCBETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _INCBETA_TINY:
            c = _INCBETA_TINY
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _INCBETA_TINY:
            d = _INCBETA_TINY
        c = 1.0 + aa / c
        if abs(c) < _INCBETA_TINY:
            c = _INCBETA_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _INCBETA_EPS:
            return h
    raise ValidationError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )


def _mean_ssd(values) -> tuple[float, float, int]:
    """Two-pass mean and sum of squared deviations, accumulated in order.

    The sequential accumulation order is part of the contract: the batched
    kernels reproduce it, so per-feature results match this scalar path bit
    for bit.
    """
    n = len(values)
    total = 0.0
    for v in values:
        total += float(v)
    mean = total / n
    ssd = 0.0
    for v in values:
        dx = float(v) - mean
        ssd += dx * dx
    return mean, ssd, n


def _t_from_moments(
    mean_x: float, ssd_x: float, n_x: int, mean_y: float, ssd_y: float, n_y: int, pooled: bool
) -> tuple[float, float, float]:
    """(t, df, p) from per-sample moments, with the degenerate sentinels."""
    diff = mean_x - mean_y
    var_x = ssd_x / (n_x - 1)
    var_y = ssd_y / (n_y - 1)
    if var_x == 0.0 and var_y == 0.0:
        df = float(n_x + n_y - 2)
        if diff == 0.0:
            return 0.0, df, 1.0
        t = SEPARATION_SENTINEL if diff > 0 else -SEPARATION_SENTINEL
        return t, df, 0.0
    if pooled:
        df = float(n_x + n_y - 2)
        pooled_var = (ssd_x + ssd_y) / df
        se = sqrt(pooled_var * (1.0 / n_x + 1.0 / n_y))
    else:
        gx = var_x / n_x
        gy = var_y / n_y
        se = sqrt(gx + gy)
        df = (gx + gy) ** 2 / (gx * gx / (n_x - 1) + gy * gy / (n_y - 1))
    t = diff / se
    p = reg_inc_beta(0.5 * df, 0.5, df / (df + t * t))
    return t, df, p


def welch_t(xs, ys, pooled: bool = False) -> TTestResult:
    """Two-sample t-test; Welch by default, pooled variance behind the flag.

    ``feature_index`` in the result is -1; callers doing per-feature sweeps
    fill it in.
    """
    if len(xs) < 2 or len(ys) < 2:
        raise ValidationError(
            f"both samples need >= 2 values, got {len(xs)} and {len(ys)}"
        )
    mean_x, ssd_x, n_x = _mean_ssd(xs)
    mean_y, ssd_y, n_y = _mean_ssd(ys)
    t, df, p = _t_from_moments(mean_x, ssd_x, n_x, mean_y, ssd_y, n_y, pooled)
    return TTestResult(feature_index=-1, t=t, df=df, p=p)


def feature_pvalues(
    ds: Dataset, obs_indices, pooled: bool = False
) -> list[TTestResult]:
    """Run the two-sample t-test on every feature over ``obs_indices``.

    The split is by class label; exactly two classes must be present, each
    with at least two of the given observations.  Column moments come from
    the kernel backend but reproduce the scalar ``welch_t`` arithmetic
    exactly, and each feature's result depends only on its own column.
    """
    obs = np.ascontiguousarray(obs_indices, dtype=np.int64)
    labels = ds.labels[obs]
    present = np.unique(labels)
    if ds.n_classes > 2 or len(present) > 2:
        raise ValidationError("per-feature t-test filter supports exactly two classes")
    if len(present) < 2:
        raise ValidationError("both classes must appear among obs_indices")
    rows_x = obs[labels == 0]
    rows_y = obs[labels == 1]
    if len(rows_x) < 2 or len(rows_y) < 2:
        raise ValidationError("each class needs >= 2 observations among obs_indices")
    kern = backend.get()
    mean_x, ssd_x = kern.class_column_moments(ds.values, rows_x)
    mean_y, ssd_y = kern.class_column_moments(ds.values, rows_y)
    n_x, n_y = len(rows_x), len(rows_y)
    results = []
    for j in range(ds.n_features):
        t, df, p = _t_from_moments(
            float(mean_x[j]), float(ssd_x[j]), n_x,
            float(mean_y[j]), float(ssd_y[j]), n_y,
            pooled,
        )
        results.append(TTestResult(feature_index=j, t=t, df=df, p=p))
    return results


def rank_by_pvalue(results) -> list[int]:
    """Feature indices sorted ascending by p, ties by |t| desc, then index."""
    if not results:
        raise ValidationError("cannot rank an empty result list")
    order = sorted(
        range(len(results)),
        key=lambda i: (results[i].p, -abs(results[i].t), results[i].feature_index),
    )
    return [results[i].feature_index for i in order]


def ecdf(values) -> EcdfCurve:
    """Empirical CDF of a finite, non-empty sample."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("ecdf needs at least one value")
    if not np.isfinite(arr).all():
        raise ValidationError("ecdf values must be finite")
    ordered = np.sort(arr)
    n = arr.size
    cumulative = np.arange(1, n + 1, dtype=np.float64) / n
    ordered.setflags(write=False)
    cumulative.setflags(write=False)
    return EcdfCurve(sorted_values=ordered, cumulative=cumulative)
