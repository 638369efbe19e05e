"""Feature selection for high-dimensional classification data.

Two pipelines over Gaussian discriminant classifiers (LDA/QDA): a filter
(per-feature two-sample t-tests, p-value ranking, test-error curve over
subset sizes) and a wrapper (sequential forward selection driven by
stratified cross-validated misclassification error), plus their
composition: prefilter by rank, then search.

Everything is deterministic under explicit 64-bit seeds.  Hot kernels run
on a compiled core when built, with a numpy fallback selected at import;
see ``featsel.backend``.
"""

from . import backend, classifiers, dataset, pipeline, selection, stats_filter
from .dataset import Dataset, FoldAssignment, HoldoutSplit, synthetic_gaussian
from .pipeline import (
    ExperimentReport,
    PipelineConfig,
    SyntheticSpec,
    emit_report,
    run_filter_experiment,
    run_wrapper_experiment,
)
from .selection import SelectionTrace, StopRule

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "ExperimentReport",
    "FoldAssignment",
    "HoldoutSplit",
    "PipelineConfig",
    "SelectionTrace",
    "StopRule",
    "SyntheticSpec",
    "backend",
    "classifiers",
    "dataset",
    "emit_report",
    "pipeline",
    "run_filter_experiment",
    "run_wrapper_experiment",
    "selection",
    "stats_filter",
    "synthetic_gaussian",
]
