"""End-to-end experiments: filter curve and filter-then-wrapper selection.

Both experiments share the same leakage discipline: the holdout split is a
function of labels and seed only, per-feature p-values and their ranking
are computed on the training portion alone, folds are built on the
training portion alone, and the test portion enters only the final
misclassification numbers.  Perturbing test-set values can therefore never
change what gets selected, only how it scores.

Sub-seeds are derived from the experiment seed with splitmix64: the first
drives the holdout split, the second the fold assignment.  Everything
downstream is deterministic, so identical (data, config) runs emit
byte-identical reports regardless of worker-thread count.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classifiers, stats_filter
from ._rng import derive_seeds
from ._svg import line_chart
from .dataset import (
    Dataset,
    HoldoutSplit,
    load_csv,
    holdout_split,
    stratified_folds,
    synthetic_gaussian,
)
from .errors import FeatselError, ValidationError
from .selection import SelectionTrace, StopRule, cv_evaluator, sequential_select

log = logging.getLogger(__name__)

DEFAULT_GRID = tuple(range(5, 71, 5))
CLASSIFIER_TOKENS = {"lda": "linear", "qda": "quadratic"}
STOP_TOKENS = {"local-min": "first-local-min", "range-min": "range-min"}


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator parameters usable as a pipeline data source."""

    n0: int
    n1: int
    d: int
    informative: tuple[int, ...]
    delta: float
    covariance_mode: str = "identity"
    seed: int = 0
    scale: float = 2.0
    var_ratio: float = 9.0

    def build(self) -> Dataset:
        return synthetic_gaussian(
            (self.n0, self.n1),
            self.d,
            self.informative,
            self.delta,
            self.covariance_mode,
            self.seed,
            scale=self.scale,
            var_ratio=self.var_ratio,
        )


@dataclass(frozen=True)
class PipelineConfig:
    """Everything an experiment run needs besides the data bytes."""

    data: str | None = None
    label_col: str | int = "label"
    synthetic: SyntheticSpec | None = None
    seed: int = 0
    train_count: int | None = None
    classifier: str = "qda"
    ridge: float = 0.0
    folds: int = 10
    prefilter_k: int = 150
    filter_grid: tuple[int, ...] = DEFAULT_GRID
    stop: StopRule = field(default_factory=StopRule)
    stratified: bool = True
    pooled_ttest: bool = False
    workers: int = 1
    out_dir: str = "featsel_out"

    def __post_init__(self):
        if self.classifier not in CLASSIFIER_TOKENS:
            raise ValidationError(
                f"classifier must be 'lda' or 'qda', got {self.classifier!r}"
            )
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.ridge < 0:
            raise ValidationError("ridge must be >= 0")
        if self.folds < 2:
            raise ValidationError(f"folds must be >= 2, got {self.folds}")
        if self.prefilter_k < 1:
            raise ValidationError("prefilter_k must be >= 1")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        if self.train_count is not None and self.train_count < 1:
            raise ValidationError("train_count must be >= 1")
        grid = tuple(int(k) for k in self.filter_grid)
        if not grid or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError(
                "filter grid must be strictly increasing positive integers"
            )
        object.__setattr__(self, "filter_grid", grid)

    @property
    def kind(self) -> str:
        return CLASSIFIER_TOKENS[self.classifier]


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    """Everything the report files are rendered from.

    ``timing_seconds`` is informational only and is never serialized, so
    emitted files stay byte-identical across reruns.
    """

    experiment: str
    config: PipelineConfig
    n_obs: int
    n_features: int
    n_classes: int
    label_mapping: str
    split: HoldoutSplit
    train_count: int
    pvalues: np.ndarray
    pvalue_summary: dict
    ecdf_curve: stats_filter.EcdfCurve
    ranking: list[int]
    feasibility_bound: int
    filter_curve: tuple[tuple[int, float], ...]
    best_k: int | None
    trace: SelectionTrace | None
    selected_features: tuple[int, ...]
    final_test_mce: float
    timing_seconds: float


def _load_dataset(cfg: PipelineConfig) -> Dataset:
    if (cfg.data is None) == (cfg.synthetic is None):
        raise ValidationError(
            "config must name exactly one data source (CSV path or synthetic spec)"
        )
    if cfg.data is not None:
        return load_csv(cfg.data, cfg.label_col)
    return cfg.synthetic.build()


def _resolved_train_count(cfg: PipelineConfig, ds: Dataset) -> int:
    if cfg.train_count is not None:
        if cfg.train_count >= ds.n_obs:
            raise ValidationError(
                f"train_count {cfg.train_count} must be < n_obs {ds.n_obs}"
            )
        return cfg.train_count
    return max(1, (3 * ds.n_obs) // 4)


def _prologue(cfg: PipelineConfig):
    """Load data, split, and rank features on the training portion."""
    ds = _load_dataset(cfg)
    train_count = _resolved_train_count(cfg, ds)
    seed_split, seed_folds = derive_seeds(cfg.seed, 2)
    split = holdout_split(ds, train_count, cfg.stratified, seed_split)
    results = stats_filter.feature_pvalues(
        ds, split.train_indices, pooled=cfg.pooled_ttest
    )
    pvalues = np.array([r.p for r in results])
    ranking = stats_filter.rank_by_pvalue(results)
    curve = stats_filter.ecdf(pvalues)
    summary = {
        "below_0.05": int((pvalues < 0.05).sum()),
        "below_0.001": int((pvalues < 0.001).sum()),
    }
    train_counts = np.bincount(ds.labels[split.train_indices], minlength=ds.n_classes)
    bound = classifiers.max_features(train_counts, cfg.kind)
    mapping = (
        ";".join(f"{name}->{i}" for i, name in enumerate(ds.label_names))
        if ds.label_names is not None
        else ""
    )
    return ds, train_count, split, seed_folds, pvalues, ranking, curve, summary, bound, mapping


def run_filter_experiment(cfg: PipelineConfig) -> ExperimentReport:
    """Rank features by p-value; sweep top-k fits over the size grid.

    For each grid size within the feasibility bound, fits the classifier on
    the training portion with the k best-ranked features and records the
    holdout-test misclassification error.  The reported selection is the
    grid argmin (smaller k on ties).
    """
    started = time.perf_counter()
    (ds, train_count, split, _seed_folds, pvalues, ranking, curve, summary,
     bound, mapping) = _prologue(cfg)

    grid = [k for k in cfg.filter_grid if k <= min(bound, ds.n_features)]
    if not grid:
        raise ValidationError(
            f"no grid point is feasible (bound {bound}, grid {cfg.filter_grid})"
        )
    points = []
    for k in grid:
        subset = ranking[:k]
        try:
            model = classifiers.fit(ds, split.train_indices, subset, cfg.kind, cfg.ridge)
            err = classifiers.mce(model, ds, split.test_indices)
        except FeatselError as e:
            raise type(e)(f"[filter curve at k={k}] {e}") from e
        points.append((k, err))
    best_k, best_err = min(points, key=lambda p: (p[1], p[0]))

    return ExperimentReport(
        experiment="filter",
        config=cfg,
        n_obs=ds.n_obs,
        n_features=ds.n_features,
        n_classes=ds.n_classes,
        label_mapping=mapping,
        split=split,
        train_count=train_count,
        pvalues=pvalues,
        pvalue_summary=summary,
        ecdf_curve=curve,
        ranking=ranking,
        feasibility_bound=bound,
        filter_curve=tuple(points),
        best_k=best_k,
        trace=None,
        selected_features=tuple(ranking[:best_k]),
        final_test_mce=best_err,
        timing_seconds=time.perf_counter() - started,
    )


def run_wrapper_experiment(cfg: PipelineConfig) -> ExperimentReport:
    """Prefilter by p-value rank, then forward-select under CV error.

    Candidates are the ``prefilter_k`` best-ranked training features in
    rank order.  Sequential forward selection scores each candidate subset
    with stratified k-fold CV error on the training portion, stops per the
    configured rule, refits on the whole training portion, and reports the
    holdout-test error of the selected subset.
    """
    started = time.perf_counter()
    (ds, train_count, split, seed_folds, pvalues, ranking, curve, summary,
     bound, mapping) = _prologue(cfg)

    if cfg.prefilter_k > ds.n_features:
        raise ValidationError(
            f"prefilter_k {cfg.prefilter_k} exceeds n_features {ds.n_features}"
        )
    candidates = ranking[: cfg.prefilter_k]
    train_labels = ds.labels[split.train_indices]
    folds = stratified_folds(split.train_indices, train_labels, cfg.folds, seed_folds)
    evaluator = cv_evaluator(ds, split.train_indices, folds, cfg.kind, cfg.ridge)
    trace = sequential_select(
        ds,
        split.train_indices,
        candidates,
        "forward",
        evaluator,
        cfg.stop,
        workers=cfg.workers,
    )
    model = classifiers.fit(
        ds, split.train_indices, trace.selected, cfg.kind, cfg.ridge
    )
    final = classifiers.mce(model, ds, split.test_indices)

    return ExperimentReport(
        experiment="wrapper",
        config=cfg,
        n_obs=ds.n_obs,
        n_features=ds.n_features,
        n_classes=ds.n_classes,
        label_mapping=mapping,
        split=split,
        train_count=train_count,
        pvalues=pvalues,
        pvalue_summary=summary,
        ecdf_curve=curve,
        ranking=ranking,
        feasibility_bound=bound,
        filter_curve=(),
        best_k=None,
        trace=trace,
        selected_features=trace.selected,
        final_test_mce=final,
        timing_seconds=time.perf_counter() - started,
    )


def _grid_token(grid: tuple[int, ...]) -> str:
    return ";".join(str(k) for k in grid)


def _summary_rows(report: ExperimentReport) -> list[tuple[str, str]]:
    cfg = report.config
    rows = [
        ("experiment", report.experiment),
        ("data_source", cfg.data if cfg.data is not None else "synthetic"),
        ("label_mapping", report.label_mapping),
        ("n_obs", str(report.n_obs)),
        ("n_features", str(report.n_features)),
        ("n_classes", str(report.n_classes)),
        ("n_train", str(len(report.split.train_indices))),
        ("n_test", str(len(report.split.test_indices))),
        ("stratified_holdout", str(cfg.stratified).lower()),
        ("classifier", cfg.classifier),
        ("ridge", repr(cfg.ridge)),
        ("seed", str(cfg.seed)),
        ("folds", str(cfg.folds)),
        ("prefilter_k", str(cfg.prefilter_k)),
        ("grid", _grid_token(cfg.filter_grid)),
        ("stop_mode", cfg.stop.mode),
        ("max_size", str(cfg.stop.max_size)),
        ("pooled_ttest", str(cfg.pooled_ttest).lower()),
        # cfg.workers is deliberately not echoed: it is an execution detail
        # that must not change output bytes
        ("feasibility_bound", str(report.feasibility_bound)),
        ("pvalues_below_0.05", str(report.pvalue_summary["below_0.05"])),
        ("pvalues_below_0.001", str(report.pvalue_summary["below_0.001"])),
    ]
    if report.experiment == "filter":
        rows.append(("best_k", str(report.best_k)))
    else:
        rows.append(("selected_size", str(len(report.selected_features))))
        rows.append(("stop_reason", report.trace.stop_reason))
        rows.append(("trace_file", "trace.csv"))
    rows.append(
        ("selected_features", ";".join(str(f) for f in report.selected_features))
    )
    rows.append(("final_test_mce", f"{report.final_test_mce:.4f}"))
    return rows


def emit_report(report: ExperimentReport, out_dir) -> list[Path]:
    """Write summary.csv, curve.csv, ecdf.csv, trace.csv and the SVG plots.

    Identical reports produce byte-identical files; timing is deliberately
    left out (it goes to the log instead).
    """
    out = Path(out_dir)
    plots = out / "plots"
    plots.mkdir(parents=True, exist_ok=True)
    written = []

    def write_csv(name, header, rows):
        path = out / name
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        written.append(path)

    write_csv("summary.csv", ["key", "value"], _summary_rows(report))
    write_csv(
        "curve.csv",
        ["k", "test_mce"],
        [(k, repr(float(v))) for k, v in report.filter_curve],
    )
    write_csv(
        "ecdf.csv",
        ["p", "cumulative"],
        [
            (repr(float(p)), repr(float(c)))
            for p, c in zip(
                report.ecdf_curve.sorted_values, report.ecdf_curve.cumulative
            )
        ],
    )
    fold_cols = [f"fold_{i}" for i in range(report.config.folds)]
    trace_rows = []
    if report.trace is not None:
        for step_no, step in enumerate(report.trace.steps, start=1):
            trace_rows.append(
                [
                    step_no,
                    step.feature_changed,
                    len(step.subset_after),
                    repr(float(step.cv_score)),
                ]
                + [repr(float(s)) for s in step.per_fold_scores]
            )
    write_csv(
        "trace.csv", ["step", "feature", "subset_size", "cv_mean"] + fold_cols, trace_rows
    )

    ecdf_points = list(
        zip(report.ecdf_curve.sorted_values, report.ecdf_curve.cumulative)
    )
    _write_text(
        plots / "ecdf.svg",
        line_chart(ecdf_points, "p-value", "fraction of features"),
        written,
    )
    if report.filter_curve:
        _write_text(
            plots / "curve.svg",
            line_chart(report.filter_curve, "number of features", "test MCE"),
            written,
        )
    if report.trace is not None:
        trace_points = [
            (len(step.subset_after), step.cv_score) for step in report.trace.steps
        ]
        _write_text(
            plots / "trace.svg",
            line_chart(trace_points, "subset size", "cross-validated MCE"),
            written,
        )
    log.info(
        "%s experiment finished in %.2fs; wrote %d files to %s",
        report.experiment,
        report.timing_seconds,
        len(written),
        out,
    )
    return written


def _write_text(path: Path, text: str, written: list):
    path.write_text(text, encoding="utf-8")
    written.append(path)
