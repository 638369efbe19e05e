"""Data model: CSV ingestion, holdout splitting, folds, synthetic data.

CSV dialect (fixed so files are bit-reproducible): comma separated, first
row is a header, ``.`` decimal point, no quoting of numeric cells.  The
label column may hold arbitrary tokens; they are remapped to dense class
ids 0..C-1 in order of first appearance and the original tokens are kept
on the dataset for reporting.

All types here are immutable after construction and safe to share across
threads; every operation is a pure function of its arguments including the
seed.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._rng import Xoshiro256StarStar
from .errors import CsvParseError, ValidationError

COVARIANCE_MODES = ("identity", "scaled", "distinct-per-class")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Observation matrix with dense integer class labels.

    ``values`` is (n_obs, n_features) float64 and finite; ``labels`` holds
    ids 0..n_classes-1 with every class populated.  ``label_names`` maps
    class id -> original label token when the data came from a file.
    """

    values: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    label_names: tuple[str, ...] | None = None

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if values.ndim != 2:
            raise ValidationError("values must be a 2-D matrix")
        n_obs, n_features = values.shape
        if n_obs < 2:
            raise ValidationError(f"need at least 2 observations, got {n_obs}")
        if n_features < 1:
            raise ValidationError("need at least 1 feature")
        if labels.shape != (n_obs,):
            raise ValidationError(
                f"labels length {labels.shape} does not match {n_obs} observations"
            )
        if not np.isfinite(values).all():
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ValidationError(
                f"non-finite value at observation {bad[0]}, feature {bad[1]}"
            )
        if labels.min() < 0:
            raise ValidationError("labels must be non-negative")
        n_classes = int(labels.max()) + 1
        counts = np.bincount(labels, minlength=n_classes)
        if (counts == 0).any():
            missing = int(np.argwhere(counts == 0)[0][0])
            raise ValidationError(f"class ids must be dense; class {missing} is empty")
        if self.feature_names is not None and len(self.feature_names) != n_features:
            raise ValidationError("feature_names length does not match n_features")
        values.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True, eq=False)
class HoldoutSplit:
    """One train/test partition of observation indices."""

    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int

    def __post_init__(self):
        for name in ("train_indices", "test_indices"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    """Fold ids aligned positionally with the index sequence it was built from."""

    k: int
    fold_of: np.ndarray
    seed: int

    def __post_init__(self):
        arr = np.ascontiguousarray(self.fold_of, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "fold_of", arr)

    def positions_in_fold(self, fold: int) -> np.ndarray:
        """Positions (into the originating index sequence) of one fold."""
        return np.flatnonzero(self.fold_of == fold)


def load_csv(path, label_column) -> Dataset:
    """Read a dataset from CSV.

    ``label_column`` is a header name or a 0-based column index.  Labels
    are remapped to dense ids in first-appearance order.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        rows = list(reader)
    if not rows:
        raise CsvParseError(f"{path}: file is empty")
    header = rows[0]
    arity = len(header)
    if isinstance(label_column, int):
        label_idx = label_column
        if not 0 <= label_idx < arity:
            raise CsvParseError(
                f"{path}: label column index {label_idx} out of range for {arity} columns"
            )
    else:
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise CsvParseError(
                f"{path}: label column {label_column!r} not in header {header}"
            ) from None
    if arity < 2:
        raise CsvParseError(f"{path}: need at least one feature column besides the label")
    if len(rows) < 2:
        raise CsvParseError(f"{path}: no data rows")

    feature_names = tuple(name for i, name in enumerate(header) if i != label_idx)
    values = []
    label_tokens = []
    for row_no, row in enumerate(rows[1:], start=2):
        if len(row) != arity:
            raise CsvParseError(
                f"{path}: row {row_no} has {len(row)} cells, expected {arity}",
                row=row_no,
            )
        parsed = []
        for col, cell in enumerate(row):
            if col == label_idx:
                label_tokens.append(cell)
                continue
            try:
                value = float(cell)
            except ValueError:
                raise CsvParseError(
                    f"{path}: row {row_no}, column {header[col]!r}: "
                    f"cannot parse {cell!r} as a number",
                    row=row_no,
                    column=header[col],
                ) from None
            if not math.isfinite(value):
                raise CsvParseError(
                    f"{path}: row {row_no}, column {header[col]!r}: "
                    f"non-finite value {cell!r}",
                    row=row_no,
                    column=header[col],
                )
            parsed.append(value)
        values.append(parsed)

    mapping: dict[str, int] = {}
    labels = []
    for token in label_tokens:
        if token not in mapping:
            mapping[token] = len(mapping)
        labels.append(mapping[token])
    if len(mapping) < 2:
        raise CsvParseError(f"{path}: data has a single class {label_tokens[0]!r}")

    return Dataset(
        values=np.array(values, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        feature_names=feature_names,
        label_names=tuple(mapping.keys()),
    )


def save_csv(ds: Dataset, path, label_column_name: str = "label") -> None:
    """Write a dataset in the package CSV dialect (features, then label).

    Floats are written with ``repr`` so a reload reproduces them exactly;
    reloading also reproduces the labels whenever class ids are already in
    first-appearance order (true for generated datasets).
    """
    names = ds.feature_names or tuple(f"f{i}" for i in range(ds.n_features))
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(names) + [label_column_name])
        for row, label in zip(ds.values, ds.labels):
            token = (
                ds.label_names[label] if ds.label_names is not None else str(int(label))
            )
            writer.writerow([repr(float(v)) for v in row] + [token])


def holdout_split(
    ds: Dataset, train_count: int, stratified: bool, seed: int
) -> HoldoutSplit:
    """Deterministic train/test split; index sequences come out sorted.

    Stratified mode allocates per-class train counts by largest remainder,
    so each differs from exact proportionality by less than 1, then adjusts
    within that slack so every class keeps at least one observation on each
    side.
    """
    n = ds.n_obs
    if not 1 <= train_count <= n - 1:
        raise ValidationError(
            f"train_count must be in [1, {n - 1}], got {train_count}"
        )
    rng = Xoshiro256StarStar(seed)
    if not stratified:
        order = list(range(n))
        rng.shuffle(order)
        train = sorted(order[:train_count])
        test = sorted(order[train_count:])
        return HoldoutSplit(np.array(train), np.array(test), seed)

    counts = ds.class_counts()
    n_classes = len(counts)
    if train_count < n_classes or n - train_count < n_classes:
        raise ValidationError(
            f"stratified split infeasible: {n_classes} classes need at least one "
            f"train and one test observation each (train_count={train_count}, "
            f"test_count={n - train_count})"
        )
    quotas = _stratified_quotas(counts, train_count)
    train: list[int] = []
    test: list[int] = []
    for c in range(n_classes):
        members = [int(i) for i in np.flatnonzero(ds.labels == c)]
        rng.shuffle(members)
        train.extend(members[: quotas[c]])
        test.extend(members[quotas[c] :])
    return HoldoutSplit(np.array(sorted(train)), np.array(sorted(test)), seed)


def _stratified_quotas(counts: np.ndarray, train_count: int) -> list[int]:
    """Largest-remainder per-class train counts, clamped to [1, n_c - 1]."""
    if int(counts.min()) < 2:
        raise ValidationError(
            "stratified split needs every class on both sides, but a class "
            "has fewer than 2 observations"
        )
    n = int(counts.sum())
    exact = [train_count * int(c) / n for c in counts]
    quotas = [int(math.floor(e)) for e in exact]
    remainders = sorted(
        range(len(counts)), key=lambda c: (-(exact[c] - quotas[c]), c)
    )
    short = train_count - sum(quotas)
    for c in remainders[:short]:
        quotas[c] += 1
    # keep >= 1 per class on both sides, preserving the total
    for c in range(len(counts)):
        low, high = 1, int(counts[c]) - 1
        if quotas[c] < low or quotas[c] > high:
            delta = min(max(quotas[c], low), high) - quotas[c]
            quotas[c] += delta
            for other in remainders:
                if other == c or delta == 0:
                    continue
                step = -1 if delta > 0 else 1
                while delta != 0 and 1 <= quotas[other] + step <= int(counts[other]) - 1:
                    quotas[other] += step
                    delta += step
            if delta != 0:
                raise ValidationError("stratified split infeasible for class sizes")
    for c, quota in enumerate(quotas):
        if abs(quota - exact[c]) >= 1.0 + 1e-9:
            raise ValidationError(
                f"stratified quota for class {c} deviates from proportionality"
            )
    return quotas


def stratified_folds(ds_indices, labels, k: int, seed: int) -> FoldAssignment:
    """Assign each of ``ds_indices`` to one of ``k`` folds.

    Fisher-Yates shuffles each class's positions, then deals them round
    robin with a fold counter that runs on across classes; this forces both
    fold-size balance (within 1) and per-class balance (within 1) by
    construction.  Classes with fewer than ``k`` members trigger a warning
    and are simply dealt to as many folds as they can reach.
    """
    indices = np.ascontiguousarray(ds_indices, dtype=np.int64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    n = len(indices)
    if labels.shape != (n,):
        raise ValidationError("labels must align with ds_indices")
    if k < 2:
        raise ValidationError(f"fold count must be >= 2, got {k}")
    if k > n:
        raise ValidationError(f"fold count {k} exceeds {n} observations")
    class_ids = np.unique(labels)
    starved = [int(c) for c in class_ids if np.count_nonzero(labels == c) < k]
    if starved:
        warnings.warn(
            f"classes {starved} have fewer than {k} observations; "
            "not every fold will contain every class",
            UserWarning,
            stacklevel=2,
        )
    rng = Xoshiro256StarStar(seed)
    fold_of = np.empty(n, dtype=np.int64)
    counter = 0
    for c in class_ids:
        positions = [int(p) for p in np.flatnonzero(labels == c)]
        rng.shuffle(positions)
        for p in positions:
            fold_of[p] = counter % k
            counter += 1
    return FoldAssignment(k=k, fold_of=fold_of, seed=seed)


def synthetic_gaussian(
    n_per_class: tuple[int, int],
    d: int,
    informative,
    delta: float,
    covariance_mode: str,
    seed: int,
    scale: float = 2.0,
    var_ratio: float = 9.0,
) -> Dataset:
    """Two-class Gaussian data with planted informative features.

    Class 0 rows come first.  Informative features have mean 0 in class 0
    and ``delta`` in class 1; all other features are N(0, 1) in both
    classes.  Covariance modes:

    * ``identity``: unit variance everywhere.
    * ``scaled``: both classes share variance ``scale**2`` on every feature.
    * ``distinct-per-class``: class 1's informative features get variance
      ``var_ratio`` (class 0 keeps 1), so the unequal-covariance assumption
      of the quadratic classifier is exercised while non-informative
      features stay identically distributed across classes.

    Sampling: one xoshiro256** stream seeded from ``seed`` fills all
    ``(n0 + n1) * d`` standard normals in row-major order via Box-Muller
    (see ``featsel._rng``), then means/scales are applied.  Byte
    deterministic for fixed arguments.
    """
    n0, n1 = n_per_class
    if n0 < 2 or n1 < 2:
        raise ValidationError("each class needs at least 2 observations")
    if d < 1:
        raise ValidationError("need at least 1 feature")
    informative = sorted(int(i) for i in informative)
    if informative and not (0 <= informative[0] and informative[-1] < d):
        raise ValidationError(f"informative indices must lie in [0, {d})")
    if len(set(informative)) != len(informative):
        raise ValidationError("informative indices must be unique")
    if covariance_mode not in COVARIANCE_MODES:
        raise ValidationError(
            f"covariance_mode must be one of {COVARIANCE_MODES}, got {covariance_mode!r}"
        )

    rng = Xoshiro256StarStar(seed)
    values = rng.normals((n0 + n1) * d).reshape(n0 + n1, d)
    info = np.array(informative, dtype=np.int64)
    if covariance_mode == "scaled":
        values *= scale
    elif covariance_mode == "distinct-per-class" and len(info):
        values[n0:, info] *= math.sqrt(var_ratio)
    if len(info):
        values[n0:, info] += delta
    labels = np.concatenate(
        [np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)]
    )
    return Dataset(
        values=values,
        labels=labels,
        feature_names=tuple(f"f{i}" for i in range(d)),
    )
