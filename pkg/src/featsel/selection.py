"""Wrapper engine: CV subset scoring, sequential search, J criterion.

The engine minimizes a loss.  Cross-validated misclassification error is
the paper-facing evaluator; the Mahalanobis-style separability criterion J
plugs into the same engine negated (higher J is better).  Candidate
evaluations within one step are independent; with ``workers > 1`` they run
on a thread pool, and because all scores are gathered before the
deterministic argmin + tie-break, results are identical for any worker
count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import classifiers
from .dataset import Dataset, FoldAssignment
from .errors import (
    FeasibilityError,
    SelectionError,
    SingularityError,
    ValidationError,
)

log = logging.getLogger(__name__)

STOP_MODES = ("first-local-min", "range-min")
EXHAUSTIVE_CAP = 200_000


@dataclass(frozen=True)
class StopRule:
    """When a sequential search ends and which visited subset it keeps.

    ``first-local-min`` stops as soon as one more step strictly worsens the
    score; plateaus continue.  ``range-min`` scans the whole size range up
    to ``max_size`` and keeps the global minimum.  On score ties,
    ``prefer_smaller`` keeps the smaller subset.
    """

    mode: str = "first-local-min"
    max_size: int = 50
    prefer_smaller: bool = True

    def __post_init__(self):
        if self.mode not in STOP_MODES:
            raise ValidationError(f"stop mode must be one of {STOP_MODES}")
        if self.max_size < 1:
            raise ValidationError("max_size must be >= 1")


@dataclass(frozen=True)
class SelectionStep:
    """One accepted move of a sequential search."""

    feature_changed: int
    subset_after: tuple[int, ...]
    cv_score: float
    per_fold_scores: tuple[float, ...]


@dataclass(frozen=True)
class SelectionTrace:
    """Ordered record of a sequential search."""

    direction: str
    steps: tuple[SelectionStep, ...]
    stop_reason: str
    selected: tuple[int, ...]

    def scores(self) -> list[float]:
        return [s.cv_score for s in self.steps]


def cv_mce(
    ds: Dataset,
    train_indices,
    subset,
    folds: FoldAssignment,
    kind: str,
    ridge: float = 0.0,
) -> tuple[float, list[float]]:
    """K-fold cross-validated misclassification error of one subset.

    For each fold, fits on the other folds' observations and scores error
    on the held-out fold; returns the unweighted mean over folds together
    with the per-fold errors.
    """
    train = np.ascontiguousarray(train_indices, dtype=np.int64)
    if len(train) != len(folds.fold_of):
        raise ValidationError(
            "fold assignment does not align with train_indices "
            f"({len(folds.fold_of)} vs {len(train)})"
        )
    per_fold = []
    for fold in range(folds.k):
        held = folds.fold_of == fold
        fit_rows = train[~held]
        score_rows = train[held]
        try:
            model = classifiers.fit(ds, fit_rows, subset, kind, ridge)
        except (FeasibilityError, SingularityError) as err:
            raise type(err)(
                f"fold {fold}: {err}",
                **(
                    {"bound": err.bound}
                    if isinstance(err, FeasibilityError)
                    else {"class_index": err.class_index}
                ),
            ) from err
        per_fold.append(classifiers.mce(model, ds, score_rows))
    return sum(per_fold) / folds.k, per_fold


def cv_evaluator(ds, train_indices, folds, kind, ridge=0.0):
    """Subset evaluator closure over ``cv_mce`` (lower is better)."""

    def evaluate(subset):
        return cv_mce(ds, train_indices, subset, folds, kind, ridge)

    return evaluate


def j_evaluator(ds, obs_indices):
    """Evaluator wrapping the separability criterion J, negated into a loss."""

    def evaluate(subset):
        score = -mahalanobis_J(ds, obs_indices, subset)
        return score, [score]

    return evaluate


def sequential_select(
    ds: Dataset,
    train_indices,
    candidates,
    direction: str,
    evaluator,
    stop: StopRule,
    max_size: int | None = None,
    workers: int = 1,
) -> SelectionTrace:
    """Greedy forward or backward feature search.

    ``evaluator(subset) -> (score, per_fold_scores)`` with lower scores
    better.  Forward starts from the empty set and adds the best candidate
    each step; backward starts from the full candidate set and removes the
    feature whose removal scores best.  Ties go to candidate-list order.
    Candidates whose evaluation raises a feasibility or singularity error
    are skipped with a logged note; if every candidate fails on the first
    step the search errors out.

    ``max_size`` overrides ``stop.max_size``: the largest subset explored
    (forward) or the smallest kept (backward).
    """
    if direction not in ("forward", "backward"):
        raise ValidationError("direction must be 'forward' or 'backward'")
    cand = [int(c) for c in candidates]
    if not cand:
        raise ValidationError("candidates must be non-empty")
    if len(set(cand)) != len(cand):
        raise ValidationError("candidates contain duplicates")
    if min(cand) < 0 or max(cand) >= ds.n_features:
        raise ValidationError(f"candidates must lie in [0, {ds.n_features})")
    if len(np.ascontiguousarray(train_indices, dtype=np.int64)) == 0:
        raise ValidationError("train_indices must be non-empty")
    limit = stop.max_size if max_size is None else max_size
    if limit < 1:
        raise ValidationError("max_size must be >= 1")
    if direction == "forward":
        limit = min(limit, len(cand))
    elif limit >= len(cand):
        raise ValidationError(
            f"backward search needs max_size < {len(cand)} candidates to remove anything"
        )

    steps: list[SelectionStep] = []
    current: list[int] = cand.copy() if direction == "backward" else []
    remaining = cand.copy() if direction == "forward" else None

    def proposals():
        if direction == "forward":
            return [(f, tuple(current) + (f,)) for f in remaining]
        return [
            (f, tuple(v for v in current if v != f))
            for f in current
        ]

    def step_count_reached():
        if direction == "forward":
            return len(current) >= limit
        return len(current) <= limit

    stop_reason = None
    while not step_count_reached():
        moves = proposals()
        scored = _evaluate_moves(moves, evaluator, workers)
        if not scored:
            if not steps:
                raise SelectionError(
                    "no candidate subset could be evaluated at the first step"
                )
            stop_reason = "candidates-exhausted"
            break
        best_feature, best_subset, best_score, best_folds = min(
            scored, key=lambda item: item[2]
        )
        if (
            stop.mode == "first-local-min"
            and steps
            and best_score > steps[-1].cv_score
        ):
            steps.append(
                SelectionStep(best_feature, best_subset, best_score, tuple(best_folds))
            )
            stop_reason = "first-local-min"
            break
        steps.append(
            SelectionStep(best_feature, best_subset, best_score, tuple(best_folds))
        )
        current = list(best_subset)
        if direction == "forward":
            remaining.remove(best_feature)
            if not remaining:
                break

    if stop_reason is None:
        stop_reason = "range-min" if stop.mode == "range-min" else "max-size-reached"
    if stop.mode == "range-min" and stop_reason == "max-size-reached":
        stop_reason = "range-min"

    selected = _designate(steps, stop, stop_reason)
    return SelectionTrace(
        direction=direction,
        steps=tuple(steps),
        stop_reason=stop_reason,
        selected=selected,
    )


def _evaluate_moves(moves, evaluator, workers):
    """Score all proposed moves, preserving order; skip infeasible ones."""

    def run(move):
        feature, subset = move
        try:
            score, per_fold = evaluator(subset)
        except (FeasibilityError, SingularityError) as err:
            log.debug("skipping subset %s: %s", subset, err)
            return None
        return feature, subset, score, list(per_fold)

    if workers > 1 and len(moves) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, moves))
    else:
        results = [run(m) for m in moves]
    return [r for r in results if r is not None]


def _designate(steps, stop: StopRule, stop_reason: str) -> tuple[int, ...]:
    """Pick the subset the stop rule keeps from the recorded steps."""
    if not steps:
        raise SelectionError("search recorded no steps")
    if stop_reason == "first-local-min":
        considered = steps[:-1]  # last step is the strictly-worse probe
    else:
        considered = steps
    scores = [s.cv_score for s in considered]
    best = min(scores)
    if stop.prefer_smaller:
        idx = scores.index(best)
    else:
        idx = len(scores) - 1 - scores[::-1].index(best)
    return considered[idx].subset_after


def mahalanobis_J(ds: Dataset, obs_indices, subset) -> float:
    """Separability criterion: squared whitened distance between class means.

    J = (mu1 - mu0)' S^-1 (mu1 - mu0) with S the pooled within-class
    covariance restricted to ``subset``.  Two-class only; S must be
    positive definite.
    """
    obs = np.ascontiguousarray(obs_indices, dtype=np.int64)
    cols = np.array(sorted(int(f) for f in subset), dtype=np.int64)
    if len(cols) == 0:
        raise ValidationError("subset must be non-empty")
    y = ds.labels[obs]
    if ds.n_classes != 2 or len(np.unique(y)) != 2:
        raise ValidationError("mahalanobis_J requires exactly two classes")
    x = ds.values[np.ix_(obs, cols)]
    x0 = x[y == 0]
    x1 = x[y == 1]
    if len(x0) < 2 or len(x1) < 2:
        raise ValidationError("each class needs >= 2 observations")
    mu0 = x0.mean(axis=0)
    mu1 = x1.mean(axis=0)
    centered0 = x0 - mu0
    centered1 = x1 - mu1
    pooled = (centered0.T @ centered0 + centered1.T @ centered1) / (len(obs) - 2)
    try:
        factor = np.linalg.cholesky(pooled)
    except np.linalg.LinAlgError:
        raise SingularityError(
            f"pooled covariance over features {cols.tolist()} is singular",
            class_index=-1,
        ) from None
    z = np.linalg.solve(factor, mu1 - mu0)
    return float(z @ z)


def exhaustive_best_subset(
    ds: Dataset,
    train_indices,
    candidates,
    size: int,
    evaluator,
    cap: int = EXHAUSTIVE_CAP,
) -> tuple[tuple[int, ...], float]:
    """Exact argmin over all ``size``-subsets of ``candidates``.

    A testing oracle for the greedy search; refuses when the combination
    count exceeds ``cap``.  Ties resolve to the lexicographically first
    subset in candidate order.
    """
    cand = [int(c) for c in candidates]
    if not 1 <= size <= len(cand):
        raise ValidationError(f"size must be in [1, {len(cand)}], got {size}")
    total = math.comb(len(cand), size)
    if total > cap:
        raise SelectionError(
            f"refusing exhaustive search over {total} subsets (cap {cap})"
        )
    best_subset = None
    best_score = None
    for combo in combinations(cand, size):
        try:
            score, _ = evaluator(combo)
        except (FeasibilityError, SingularityError) as err:
            log.debug("skipping subset %s: %s", combo, err)
            continue
        if best_score is None or score < best_score:
            best_subset, best_score = combo, score
    if best_subset is None:
        raise SelectionError("no feasible subset at the requested size")
    return best_subset, best_score
