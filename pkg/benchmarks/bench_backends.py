#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Runs the hot paths that dominate experiment runtime (bulk normal
generation, per-feature t-statistics, discriminant fit/predict inside
cross-validation, and a full wrapper run) on both backends and prints a
timing table.  Also asserts that the two backends agree on results.

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from featsel import backend, classifiers, dataset, pipeline, stats_filter
from featsel.selection import StopRule


def timed(fn, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_normals(n):
    from featsel._rng import Xoshiro256StarStar

    def run():
        return Xoshiro256StarStar(42).normals(n)

    return run


def bench_pvalues(ds, obs):
    def run():
        return stats_filter.feature_pvalues(ds, obs)

    return run


def bench_cv_fits(ds, train, folds):
    from featsel.selection import cv_mce

    def run():
        scores = []
        for lead in range(20):
            subset = tuple(range(lead, lead + 10))
            scores.append(cv_mce(ds, train, subset, folds, "quadratic")[0])
        return scores

    return run


def bench_wrapper(spec, stop):
    cfg = pipeline.PipelineConfig(
        synthetic=spec, seed=5, train_count=160, classifier="qda",
        prefilter_k=60, folds=10, stop=stop,
    )

    def run():
        return pipeline.run_wrapper_experiment(cfg)

    return run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    if "c" not in backend.available():
        raise SystemExit("compiled core not built; nothing to compare")

    scale = 4 if args.quick else 1
    n_normals = 2_000_000 // scale
    d = 4000 // scale

    ds = dataset.synthetic_gaussian((108, 108), d, range(10), 1.2, "identity", 3)
    obs = np.arange(ds.n_obs)
    split = dataset.holdout_split(ds, 160, True, 11)
    folds = dataset.stratified_folds(
        split.train_indices, ds.labels[split.train_indices], 10, 17
    )
    spec = pipeline.SyntheticSpec(
        108, 108, 1000 // scale, tuple(range(5)), 2.0, "identity", seed=29
    )
    stop = StopRule("first-local-min", 12)

    cases = [
        (f"xoshiro normals ({n_normals:,})", bench_normals(n_normals), 3),
        (f"feature_pvalues (216 x {d})", bench_pvalues(ds, obs), 3),
        ("cv_mce, 20 QDA subsets of 10", bench_cv_fits(ds, split.train_indices, folds), 3),
        ("wrapper experiment (end to end)", bench_wrapper(spec, stop), 1),
    ]

    print(f"{'case':38s} {'compiled':>12s} {'fallback':>12s} {'speedup':>9s}")
    for label, fn, repeats in cases:
        backend.force("c")
        t_c, res_c = timed(fn, repeats)
        backend.force("python")
        t_py, res_py = timed(fn, repeats)
        backend.force("c")
        _check_agreement(label, res_c, res_py)
        print(f"{label:38s} {t_c * 1e3:10.1f}ms {t_py * 1e3:10.1f}ms {t_py / t_c:8.1f}x")


def _check_agreement(label, a, b):
    if isinstance(a, np.ndarray):
        np.testing.assert_array_equal(a, b)
    elif isinstance(a, list) and a and isinstance(a[0], stats_filter.TTestResult):
        assert [r.p for r in a] == [r.p for r in b], f"{label}: p-values diverged"
    elif isinstance(a, list):
        assert a == b, f"{label}: scores diverged"
    elif isinstance(a, pipeline.ExperimentReport):
        assert a.selected_features == b.selected_features, f"{label}: selection diverged"
        assert a.final_test_mce == b.final_test_mce, f"{label}: MCE diverged"


if __name__ == "__main__":
    main()
