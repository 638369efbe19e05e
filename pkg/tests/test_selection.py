import math

import numpy as np
import pytest

from featsel import classifiers, selection
from featsel.dataset import Dataset, stratified_folds, synthetic_gaussian
from featsel.errors import FeasibilityError, SelectionError, SingularityError, ValidationError
from featsel.selection import (
    StopRule,
    cv_evaluator,
    cv_mce,
    exhaustive_best_subset,
    mahalanobis_J,
    sequential_select,
)


def scripted_by_size(scores):
    """Evaluator that scores a subset purely by its size (1-based script)."""

    def evaluate(subset):
        score = scores[len(subset) - 1]
        return score, [score]

    return evaluate


def toy_dataset(n_features=3, seed=0):
    ds = synthetic_gaussian((20, 20), n_features, (), 0.0, "identity", seed)
    return ds


class TestCvMce:
    def _separable_ds(self):
        rng = np.random.default_rng(5)
        values = np.column_stack(
            [
                np.concatenate([rng.normal(-4, 0.5, 20), rng.normal(4, 0.5, 20)]),
                rng.normal(size=40),
            ]
        )
        return Dataset(values=values, labels=np.repeat([0, 1], 20))

    def test_mean_is_exact_average_of_folds(self):
        ds = synthetic_gaussian((30, 30), 5, (0,), 1.0, "identity", 9)
        train = np.arange(60)
        folds = stratified_folds(train, ds.labels[train], 5, 3)
        mean, per_fold = cv_mce(ds, train, (0, 1), folds, "linear")
        assert len(per_fold) == 5
        assert mean == sum(per_fold) / 5

    def test_perfectly_separable_feature_scores_zero(self):
        ds = self._separable_ds()
        train = np.arange(40)
        folds = stratified_folds(train, ds.labels[train], 4, 1)
        mean, per_fold = cv_mce(ds, train, (0,), folds, "linear")
        assert mean == 0.0
        assert per_fold == [0.0] * 4

    def test_two_fold_hand_computation(self):
        ds = synthetic_gaussian((8, 8), 2, (0,), 1.5, "identity", 11)
        train = np.arange(16)
        folds = stratified_folds(train, ds.labels[train], 2, 7)
        mean, per_fold = cv_mce(ds, train, (0, 1), folds, "linear")
        expected = []
        for fold in (0, 1):
            held = folds.fold_of == fold
            model = classifiers.fit(ds, train[~held], (0, 1), "linear")
            expected.append(classifiers.mce(model, ds, train[held]))
        assert per_fold == expected
        assert mean == sum(expected) / 2

    def test_misaligned_folds_rejected(self):
        ds = toy_dataset()
        folds = stratified_folds(np.arange(10), ds.labels[:10], 2, 0)
        with pytest.raises(ValidationError):
            cv_mce(ds, np.arange(12), (0,), folds, "linear")

    def test_fold_failure_names_fold(self):
        ds = toy_dataset(n_features=4)
        train = np.concatenate([np.arange(4), np.arange(20, 24)])
        folds = stratified_folds(train, ds.labels[train], 2, 0)
        with pytest.raises(FeasibilityError) as exc:
            cv_mce(ds, train, (0, 1, 2), folds, "quadratic")
        assert "fold 0" in str(exc.value)
        assert exc.value.bound == 1


class TestStopRules:
    def test_first_local_min_example(self):
        ds = toy_dataset(3)
        trace = sequential_select(
            ds, np.arange(ds.n_obs), [0, 1, 2], "forward",
            scripted_by_size([0.30, 0.20, 0.25]),
            StopRule("first-local-min", 3),
        )
        assert trace.stop_reason == "first-local-min"
        assert len(trace.selected) == 2
        assert [s.cv_score for s in trace.steps] == [0.30, 0.20, 0.25]
        assert trace.selected == trace.steps[1].subset_after

    def test_range_min_example(self):
        ds = toy_dataset(5)
        trace = sequential_select(
            ds, np.arange(ds.n_obs), [0, 1, 2, 3, 4], "forward",
            scripted_by_size([0.30, 0.20, 0.25, 0.15, 0.18]),
            StopRule("range-min", 5),
        )
        assert trace.stop_reason == "range-min"
        assert len(trace.selected) == 4
        assert [s.cv_score for s in trace.steps] == [0.30, 0.20, 0.25, 0.15, 0.18]

    def test_plateau_continues_then_prefers_smaller(self):
        ds = toy_dataset(4)
        trace = sequential_select(
            ds, np.arange(ds.n_obs), [0, 1, 2, 3], "forward",
            scripted_by_size([0.30, 0.20, 0.20, 0.25]),
            StopRule("first-local-min", 4),
        )
        assert trace.stop_reason == "first-local-min"
        assert len(trace.steps) == 4  # plateau explored, then the worse probe
        assert len(trace.selected) == 2

    def test_prefer_larger_on_ties_when_disabled(self):
        ds = toy_dataset(4)
        trace = sequential_select(
            ds, np.arange(ds.n_obs), [0, 1, 2, 3], "forward",
            scripted_by_size([0.30, 0.20, 0.20, 0.25]),
            StopRule("first-local-min", 4, prefer_smaller=False),
        )
        assert len(trace.selected) == 3

    def test_max_size_reached_in_local_min_mode(self):
        ds = toy_dataset(5)
        trace = sequential_select(
            ds, np.arange(ds.n_obs), [0, 1, 2, 3, 4], "forward",
            scripted_by_size([0.30, 0.20, 0.10, 0.05, 0.01]),
            StopRule("first-local-min", 5), max_size=3,
        )
        assert trace.stop_reason == "max-size-reached"
        assert len(trace.selected) == 3

    def test_single_step_range_min(self):
        ds = toy_dataset(3)
        trace = sequential_select(
            ds, np.arange(ds.n_obs), [0, 1, 2], "forward",
            scripted_by_size([0.4]),
            StopRule("range-min", 1),
        )
        assert len(trace.steps) == 1
        assert len(trace.selected) == 1
        assert trace.stop_reason == "range-min"

    def test_invalid_stop_rule(self):
        with pytest.raises(ValidationError):
            StopRule("global-min", 5)
        with pytest.raises(ValidationError):
            StopRule("range-min", 0)


class TestSequentialSelect:
    def _planted_ds(self):
        rng = np.random.default_rng(2)
        label_col = np.repeat([-5.0, 5.0], 25) + rng.normal(0, 0.1, 50)
        noise = rng.normal(size=(50, 2))
        values = np.column_stack([noise[:, 0], noise[:, 1], label_col])
        return Dataset(values=values, labels=np.repeat([0, 1], 25))

    def test_forward_picks_the_separating_feature(self):
        ds = self._planted_ds()
        train = np.arange(50)
        folds = stratified_folds(train, ds.labels, 5, 4)
        evaluator = cv_evaluator(ds, train, folds, "linear")
        # oracle: singleton scores, best must be feature 2
        singles = {f: evaluator((f,))[0] for f in (0, 1, 2)}
        assert min(singles, key=singles.get) == 2
        assert singles[2] == 0.0
        trace = sequential_select(
            ds, train, [0, 1, 2], "forward", evaluator, StopRule("first-local-min", 3)
        )
        assert trace.steps[0].feature_changed == 2
        assert trace.selected[0] == 2

    def test_greedy_step_consistency_replay(self):
        ds = synthetic_gaussian((40, 40), 8, (0, 1, 2), 1.0, "identity", 13)
        train = np.arange(80)
        folds = stratified_folds(train, ds.labels[train], 5, 21)
        evaluator = cv_evaluator(ds, train, folds, "linear")
        trace = sequential_select(
            ds, train, list(range(8)), "forward", evaluator, StopRule("range-min", 4)
        )
        chosen = []
        for step in trace.steps:
            prefix = tuple(chosen)
            candidates = [f for f in range(8) if f not in chosen]
            rescored = [(evaluator(prefix + (f,))[0], i) for i, f in enumerate(candidates)]
            best_score, best_pos = min(rescored)
            assert candidates[best_pos] == step.feature_changed
            assert best_score == step.cv_score
            chosen.append(step.feature_changed)

    def test_tie_break_follows_candidate_order(self):
        ds = toy_dataset(3)
        trace = sequential_select(
            ds, np.arange(ds.n_obs), [2, 0, 1], "forward",
            scripted_by_size([0.5]), StopRule("range-min", 1),
        )
        assert trace.selected == (2,)  # all tied, first candidate wins

    def test_infeasible_candidates_are_skipped(self):
        ds = toy_dataset(3)

        def evaluator(subset):
            if 1 in subset:
                raise FeasibilityError("not enough samples", bound=0)
            return 0.5 - 0.1 * len(subset), [0.0]

        trace = sequential_select(
            ds, np.arange(ds.n_obs), [0, 1, 2], "forward", evaluator,
            StopRule("range-min", 3),
        )
        assert 1 not in trace.selected
        assert trace.stop_reason == "candidates-exhausted"
        assert len(trace.steps) == 2

    def test_all_infeasible_at_first_step(self):
        ds = toy_dataset(3)

        def evaluator(subset):
            raise SingularityError("always singular")

        with pytest.raises(SelectionError):
            sequential_select(
                ds, np.arange(ds.n_obs), [0, 1, 2], "forward", evaluator,
                StopRule("range-min", 2),
            )

    def test_backward_removal(self):
        ds = toy_dataset(4)
        # removal of higher-indexed features scores better (lower)
        def evaluator(subset):
            score = -sum(subset) / 10.0
            return score, [score]

        trace = sequential_select(
            ds, np.arange(ds.n_obs), [0, 1, 2, 3], "backward", evaluator,
            StopRule("range-min", 4), max_size=2,
        )
        assert trace.direction == "backward"
        assert [len(s.subset_after) for s in trace.steps] == [3, 2]
        assert trace.steps[0].feature_changed == 0  # dropping 0 keeps the sum high
        assert trace.steps[1].subset_after == (2, 3)
        # range-min keeps the best recorded subset, which is the larger one here
        assert trace.selected == (1, 2, 3)

    def test_backward_needs_room_to_remove(self):
        ds = toy_dataset(3)
        with pytest.raises(ValidationError):
            sequential_select(
                ds, np.arange(ds.n_obs), [0, 1, 2], "backward",
                scripted_by_size([0.1, 0.2, 0.3]), StopRule("range-min", 3),
            )

    def test_worker_count_does_not_change_trace(self):
        ds = synthetic_gaussian((40, 40), 12, (0, 1, 2, 3), 1.2, "identity", 31)
        train = np.arange(80)
        folds = stratified_folds(train, ds.labels[train], 5, 8)
        evaluator = cv_evaluator(ds, train, folds, "quadratic")
        traces = [
            sequential_select(
                ds, train, list(range(12)), "forward", evaluator,
                StopRule("first-local-min", 6), workers=w,
            )
            for w in (1, 4)
        ]
        assert traces[0] == traces[1]

    def test_trace_depends_only_on_fold_assignment(self):
        ds = synthetic_gaussian((30, 30), 6, (0, 1), 1.0, "identity", 3)
        train = np.arange(60)
        folds = stratified_folds(train, ds.labels[train], 5, 42)
        evaluator = cv_evaluator(ds, train, folds, "linear")
        first = sequential_select(
            ds, train, list(range(6)), "forward", evaluator, StopRule("range-min", 3)
        )
        np.random.seed(999)  # unrelated global randomness must not matter
        second = sequential_select(
            ds, train, list(range(6)), "forward", evaluator, StopRule("range-min", 3)
        )
        assert first == second


class TestMahalanobisJ:
    def _pattern(self, x_scale=1.0):
        c = math.sqrt(1.5)
        pattern = np.array(
            [[c * x_scale, 0.0], [-c * x_scale, 0.0], [0.0, c], [0.0, -c]]
        )
        values = np.vstack([pattern, pattern + np.array([2.0, 0.0])])
        return Dataset(values=values, labels=np.repeat([0, 1], 4))

    def test_identity_covariance_gives_squared_distance(self):
        ds = self._pattern()
        assert mahalanobis_J(ds, np.arange(8), (0, 1)) == pytest.approx(4.0, abs=1e-9)

    def test_anisotropic_covariance(self):
        ds = self._pattern(x_scale=2.0)  # pooled covariance diag(4, 1)
        assert mahalanobis_J(ds, np.arange(8), (0, 1)) == pytest.approx(1.0, abs=1e-9)

    def test_monotone_under_coordinate_extension(self):
        ds = synthetic_gaussian((60, 60), 5, (0,), 1.5, "identity", 19)
        obs = np.arange(120)
        j_single = mahalanobis_J(ds, obs, (0,))
        for noise in (1, 2, 3, 4):
            j_pair = mahalanobis_J(ds, obs, (0, noise))
            assert j_pair >= j_single - 1e-10

    def test_duplicate_column_is_singular(self):
        values = np.repeat(np.random.default_rng(0).normal(size=(12, 1)), 2, axis=1)
        ds = Dataset(values=values, labels=np.repeat([0, 1], 6))
        with pytest.raises(SingularityError):
            mahalanobis_J(ds, np.arange(12), (0, 1))

    def test_two_class_requirement(self):
        values = np.random.default_rng(1).normal(size=(9, 2))
        ds = Dataset(values=values, labels=np.array([0, 0, 0, 1, 1, 1, 2, 2, 2]))
        with pytest.raises(ValidationError):
            mahalanobis_J(ds, np.arange(9), (0, 1))

    def test_j_evaluator_negates(self):
        ds = self._pattern()
        score, per_fold = selection.j_evaluator(ds, np.arange(8))((0, 1))
        assert score == pytest.approx(-4.0, abs=1e-9)
        assert per_fold == [score]


class TestExhaustive:
    def test_evaluation_count(self):
        ds = toy_dataset(3)
        calls = []

        def evaluator(subset):
            calls.append(subset)
            return float(sum(subset)), [0.0]

        subset, score = exhaustive_best_subset(ds, np.arange(10), [0, 1, 2], 2, evaluator)
        assert len(calls) == 3  # C(3, 2)
        assert subset == (0, 1)
        assert score == 1.0

    def test_full_set_when_size_equals_candidates(self):
        ds = toy_dataset(4)
        subset, _ = exhaustive_best_subset(
            ds, np.arange(10), [3, 1, 2], 3, scripted_by_size([0.3, 0.2, 0.1])
        )
        assert subset == (3, 1, 2)

    def test_cap_refusal(self):
        ds = toy_dataset(30)
        with pytest.raises(SelectionError):
            exhaustive_best_subset(
                ds, np.arange(10), list(range(25)), 12, scripted_by_size([0.0] * 25)
            )

    def test_dominates_greedy(self):
        for seed in (1, 2, 3):
            ds = synthetic_gaussian((25, 25), 8, (0, 1), 0.8, "identity", seed)
            train = np.arange(50)
            folds = stratified_folds(train, ds.labels[train], 5, seed)
            evaluator = cv_evaluator(ds, train, folds, "linear")
            greedy = sequential_select(
                ds, train, list(range(8)), "forward", evaluator, StopRule("range-min", 3)
            )
            for step in greedy.steps:
                size = len(step.subset_after)
                _, best = exhaustive_best_subset(
                    ds, train, list(range(8)), size, evaluator
                )
                assert best <= step.cv_score
