"""Gaussian discriminant classifiers: LDA (pooled) and QDA (per class).

The decision rule is Gaussian maximum likelihood with empirical priors:

    score_c(x) = -1/2 log|Sigma_c| - 1/2 (x-mu_c)' Sigma_c^-1 (x-mu_c) + log pi_c

with a covariance matrix shared across classes for the linear kind (so the
quadratic terms cancel and boundaries are affine) and per-class matrices
for the quadratic kind.  Covariance divisors are n - n_classes (pooled)
and n_c - 1 (per class).  All numerics go through Cholesky factors:
Mahalanobis terms via triangular solves, log-determinants as twice the sum
of log-diagonals; explicit inverses are never formed.  Exact score ties
predict the lower class id.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np

from . import backend
from ._kernels_common import KernelSingularError
from .dataset import Dataset
from .errors import FeasibilityError, SingularityError, ValidationError

KINDS = ("linear", "quadratic")


@dataclass(frozen=True, eq=False)
class DiscriminantModel:
    """A fitted discriminant classifier over a feature subset.

    ``covariance_factors`` holds lower-triangular Cholesky factors with
    shape (1, d, d) for the linear kind (shared) or (n_classes, d, d) for
    the quadratic kind; ``log_dets`` matches its leading dimension.
    """

    kind: str
    feature_subset: tuple[int, ...]
    class_means: np.ndarray
    covariance_factors: np.ndarray
    log_dets: np.ndarray
    log_priors: np.ndarray
    class_counts: np.ndarray
    ridge: float

    @property
    def n_classes(self) -> int:
        return self.class_means.shape[0]

    @property
    def d_sub(self) -> int:
        return len(self.feature_subset)


def max_features(class_counts, kind: str) -> int:
    """Ridge-free feasibility bound on the subset dimension.

    Quadratic: min class count - 1 (each class covariance must be full
    rank); linear: total count - number of classes.
    """
    counts = [int(c) for c in class_counts]
    if min(counts) < 2:
        raise ValidationError("every class needs at least 2 observations")
    if kind == "quadratic":
        return min(counts) - 1
    if kind == "linear":
        return sum(counts) - len(counts)
    raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")


def fit(
    ds: Dataset,
    obs_indices,
    feature_subset,
    kind: str,
    ridge: float = 0.0,
) -> DiscriminantModel:
    """Fit the discriminant model on the given rows and feature subset."""
    if kind not in KINDS:
        raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")
    if ridge < 0:
        raise ValidationError(f"ridge must be >= 0, got {ridge}")
    obs = np.ascontiguousarray(obs_indices, dtype=np.int64)
    subset = tuple(int(f) for f in feature_subset)
    if len(set(subset)) != len(subset):
        raise ValidationError("feature_subset contains duplicates")
    if not subset:
        raise ValidationError("feature_subset must be non-empty")
    if min(subset) < 0 or max(subset) >= ds.n_features:
        raise ValidationError(f"feature indices must lie in [0, {ds.n_features})")

    y = ds.labels[obs]
    n_classes = ds.n_classes
    counts = np.bincount(y, minlength=n_classes)
    if counts.min() < 2:
        missing = int(np.argmin(counts))
        raise ValidationError(
            f"class {missing} has {counts[missing]} observations among "
            "obs_indices; need >= 2 per class"
        )
    d_sub = len(subset)
    if ridge == 0.0:
        bound = max_features(counts, kind)
        if d_sub > bound:
            raise FeasibilityError(
                f"{kind} fit with {d_sub} features is infeasible for class counts "
                f"{counts.tolist()}; the ridge-free bound is {bound} "
                "(pass ridge > 0 to override)",
                bound=bound,
            )

    x = np.ascontiguousarray(ds.values[np.ix_(obs, np.array(subset, dtype=np.int64))])
    try:
        means, chols, log_dets, counts64 = backend.get().fit_gaussian(
            x, y, n_classes, kind == "linear", float(ridge)
        )
    except KernelSingularError as err:
        which = "pooled covariance" if err.class_index < 0 else f"class {err.class_index}"
        raise SingularityError(
            f"covariance for {which} is singular at ridge={ridge} "
            f"(features {subset})",
            class_index=err.class_index,
        ) from None
    n = len(obs)
    log_priors = np.array([log(int(c) / n) for c in counts64])
    for arr in (means, chols, log_dets, log_priors, counts64):
        arr.setflags(write=False)
    return DiscriminantModel(
        kind=kind,
        feature_subset=subset,
        class_means=means,
        covariance_factors=chols,
        log_dets=log_dets,
        log_priors=log_priors,
        class_counts=counts64,
        ridge=float(ridge),
    )


def predict(model: DiscriminantModel, row) -> int:
    """Class id for one feature-subset row (ties to the lower class id)."""
    arr = np.ascontiguousarray(row, dtype=np.float64)
    if arr.shape != (model.d_sub,):
        raise ValidationError(
            f"row has shape {arr.shape}, model expects ({model.d_sub},)"
        )
    if not np.isfinite(arr).all():
        raise ValidationError("row must be finite")
    return int(predict_rows(model, arr.reshape(1, -1))[0])


def predict_rows(model: DiscriminantModel, rows: np.ndarray) -> np.ndarray:
    """Vector of class ids for an (n, d_sub) matrix of subset rows."""
    x = np.ascontiguousarray(rows, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.d_sub:
        raise ValidationError(
            f"rows have shape {x.shape}, model expects (*, {model.d_sub})"
        )
    return backend.get().predict_gaussian(
        x,
        model.class_means,
        model.covariance_factors,
        model.log_dets,
        model.log_priors,
    )


def mce(model: DiscriminantModel, ds: Dataset, obs_indices) -> float:
    """Misclassification error: misclassified count / evaluated count."""
    obs = np.ascontiguousarray(obs_indices, dtype=np.int64)
    if len(obs) == 0:
        raise ValidationError("obs_indices must be non-empty")
    cols = np.array(model.feature_subset, dtype=np.int64)
    predictions = predict_rows(model, ds.values[np.ix_(obs, cols)])
    wrong = int((predictions != ds.labels[obs]).sum())
    return wrong / len(obs)
