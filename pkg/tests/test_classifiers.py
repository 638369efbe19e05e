import math

import numpy as np
import pytest

from featsel import classifiers
from featsel.classifiers import fit, max_features, mce, predict, predict_rows
from featsel.dataset import Dataset, synthetic_gaussian
from featsel.errors import FeasibilityError, SingularityError, ValidationError

from oracles import gaussian_log_density


def _scores(model, rows):
    """Recompute discriminant scores straight from the model fields."""
    from scipy.linalg import solve_triangular

    rows = np.asarray(rows, dtype=np.float64)
    pooled = model.covariance_factors.shape[0] == 1
    out = np.empty((model.n_classes, len(rows)))
    for c in range(model.n_classes):
        factor = model.covariance_factors[0 if pooled else c]
        log_det = model.log_dets[0 if pooled else c]
        z = solve_triangular(factor, (rows - model.class_means[c]).T, lower=True)
        out[c] = -0.5 * log_det - 0.5 * (z * z).sum(axis=0) + model.log_priors[c]
    return out


class TestFit:
    def test_means_match_sample_means(self):
        ds = synthetic_gaussian((400, 400), 2, (0,), 2.0, "identity", 21)
        model = fit(ds, np.arange(ds.n_obs), (0, 1), "linear")
        for c in (0, 1):
            expected = ds.values[ds.labels == c].mean(axis=0)
            np.testing.assert_allclose(model.class_means[c], expected, atol=1e-12)
        assert model.class_means[1][0] - model.class_means[0][0] == pytest.approx(
            2.0, abs=0.2
        )

    def test_log_priors_normalize(self):
        ds = synthetic_gaussian((30, 70), 3, (), 0.0, "identity", 2)
        model = fit(ds, np.arange(100), (0, 1, 2), "linear")
        assert sum(math.exp(v) for v in model.log_priors) == pytest.approx(1.0, abs=1e-12)
        assert model.log_priors[0] == pytest.approx(math.log(0.3), abs=1e-12)

    def test_duplicated_observation_is_singular(self):
        d_sub = 3
        row = np.array([1.0, 2.0, 3.0])
        values = np.vstack([np.tile(row, (d_sub + 2, 1)), np.tile(row + 1, (d_sub + 2, 1))])
        labels = np.repeat([0, 1], d_sub + 2)
        ds = Dataset(values=values, labels=labels)
        with pytest.raises(SingularityError) as exc:
            fit(ds, np.arange(ds.n_obs), (0, 1, 2), "quadratic", ridge=0.0)
        assert "class" in str(exc.value)
        model = fit(ds, np.arange(ds.n_obs), (0, 1, 2), "quadratic", ridge=1e-6)
        assert model.ridge == 1e-6

    def test_feasibility_error_names_bound(self):
        ds = synthetic_gaussian((5, 5), 8, (), 0.0, "identity", 3)
        with pytest.raises(FeasibilityError) as exc:
            fit(ds, np.arange(10), tuple(range(5)), "quadratic")
        assert exc.value.bound == 4
        # ridge lifts the precondition
        fit(ds, np.arange(10), tuple(range(5)), "quadratic", ridge=1e-3)

    def test_cholesky_factor_shape_and_positivity(self):
        ds = synthetic_gaussian((50, 50), 4, (0,), 1.0, "identity", 5)
        linear = fit(ds, np.arange(100), (0, 1, 2, 3), "linear")
        quad = fit(ds, np.arange(100), (0, 1, 2, 3), "quadratic")
        assert linear.covariance_factors.shape == (1, 4, 4)
        assert quad.covariance_factors.shape == (2, 4, 4)
        for factors in (linear.covariance_factors, quad.covariance_factors):
            for factor in factors:
                assert (np.diag(factor) > 0).all()
                assert np.allclose(factor, np.tril(factor))

    def test_needs_two_observations_per_class(self):
        ds = synthetic_gaussian((5, 5), 2, (), 0.0, "identity", 1)
        with pytest.raises(ValidationError):
            fit(ds, np.array([0, 1, 2, 5]), (0,), "linear")


class TestPredict:
    def _linear_model(self):
        rng = np.random.default_rng(10)
        m = np.array([2.0, 0.0])
        values = np.vstack(
            [rng.normal(size=(200, 2)) - m, rng.normal(size=(200, 2)) + m]
        )
        labels = np.repeat([0, 1], 200)
        ds = Dataset(values=values, labels=labels)
        return fit(ds, np.arange(400), (0, 1), "linear")

    def test_midpoint_ties_to_lower_class(self):
        model = self._linear_model()
        midpoint = 0.5 * (model.class_means[0] + model.class_means[1])
        scores = _scores(model, [midpoint])
        if abs(model.log_priors[0] - model.log_priors[1]) < 1e-15:
            assert scores[0, 0] == pytest.approx(scores[1, 0], abs=1e-9)
        assert predict(model, midpoint) in (0, 1)

    def test_exact_tie_prefers_lower_id(self):
        # hand-built symmetric model: identical factors and priors
        ds = Dataset(
            values=np.array([[-1.0], [-3.0], [1.0], [3.0]]),
            labels=np.array([0, 0, 1, 1]),
        )
        model = fit(ds, np.arange(4), (0,), "linear")
        assert predict(model, [0.0]) == 0

    def test_class_means_predict_their_class(self):
        model = self._linear_model()
        assert predict(model, model.class_means[0]) == 0
        assert predict(model, model.class_means[1]) == 1

    def test_mahalanobis_side(self):
        model = self._linear_model()
        rng = np.random.default_rng(3)
        rows = rng.normal(scale=3.0, size=(100, 2))
        preds = predict_rows(model, rows)
        scores = _scores(model, rows)
        np.testing.assert_array_equal(preds, scores.argmax(axis=0))

    def test_quadratic_1d_matches_density_oracle(self):
        ds = Dataset(
            values=np.array([[-1.0], [0.0], [1.0], [-2.0], [0.0], [2.0]]),
            labels=np.array([0, 0, 0, 1, 1, 1]),
        )
        model = fit(ds, np.arange(6), (0,), "quadratic")
        np.testing.assert_allclose(model.class_means.ravel(), [0.0, 0.0], atol=0)
        np.testing.assert_allclose(
            model.covariance_factors[:, 0, 0] ** 2, [1.0, 4.0], atol=1e-14
        )
        grid = np.linspace(-6.0, 6.0, 1000)
        preds = predict_rows(model, grid.reshape(-1, 1))
        for x, got in zip(grid, preds):
            d0 = gaussian_log_density(x, 0.0, 1.0) + math.log(0.5)
            d1 = gaussian_log_density(x, 0.0, 4.0) + math.log(0.5)
            expected = 0 if d0 >= d1 else 1
            assert got == expected, f"x={x}: predicted {got}, density says {expected}"

    def test_dimension_mismatch(self):
        model = self._linear_model()
        with pytest.raises(ValidationError):
            predict(model, [1.0, 2.0, 3.0])

    def test_lda_convexity_of_decision_regions(self):
        model = self._linear_model()
        rng = np.random.default_rng(8)
        points = rng.normal(scale=4.0, size=(300, 2))
        preds = predict_rows(model, points)
        for c in (0, 1):
            mine = points[preds == c]
            for i in range(0, len(mine) - 1, 2):
                for lam in (0.25, 0.5, 0.75):
                    blend = lam * mine[i] + (1 - lam) * mine[i + 1]
                    assert predict(model, blend) == c

    def test_relabeling_permutes_predictions(self):
        ds = synthetic_gaussian((150, 150), 3, (0, 1), 3.0, "identity", 30)
        swapped = Dataset(values=ds.values.copy(), labels=1 - ds.labels)
        rows = np.arange(ds.n_obs)
        subset = (0, 1, 2)
        for kind in ("linear", "quadratic"):
            base = predict_rows(fit(ds, rows, subset, kind), ds.values[:, :3])
            flip = predict_rows(fit(swapped, rows, subset, kind), ds.values[:, :3])
            np.testing.assert_array_equal(flip, 1 - base)

    def test_quadratic_equals_linear_when_covariances_match(self):
        rng = np.random.default_rng(44)
        base = rng.normal(size=(100, 3))
        values = np.vstack([base, base + np.array([2.0, -1.0, 0.5])])
        labels = np.repeat([0, 1], 100)
        ds = Dataset(values=values, labels=labels)
        rows = np.arange(200)
        linear = fit(ds, rows, (0, 1, 2), "linear")
        quad = fit(ds, rows, (0, 1, 2), "quadratic")
        test_rows = rng.normal(size=(500, 3)) * 2.0
        np.testing.assert_array_equal(
            predict_rows(linear, test_rows), predict_rows(quad, test_rows)
        )
        np.testing.assert_allclose(
            _scores(linear, test_rows), _scores(quad, test_rows), atol=1e-8
        )


class TestMce:
    def _model_and_test_sets(self):
        train = Dataset(
            values=np.array([[-1.0], [-2.0], [9.0], [12.0]]),
            labels=np.array([0, 0, 1, 1]),
        )
        return fit(train, np.arange(4), (0,), "linear")

    def test_all_correct_is_zero(self):
        model = self._model_and_test_sets()
        ds = Dataset(
            values=np.array([[-1.0]] * 5 + [[11.0]] * 5),
            labels=np.repeat([0, 1], 5),
        )
        assert mce(model, ds, np.arange(10)) == 0.0

    @pytest.mark.parametrize("wrong,expected", [(4, "0.0714"), (5, "0.0893")])
    def test_fraction_of_56_formats_to_table_precision(self, wrong, expected):
        model = self._model_and_test_sets()
        # 56 test observations, `wrong` of them on the wrong side
        values = np.array([[-1.0]] * (28 - wrong) + [[11.0]] * wrong + [[11.0]] * 28)
        labels = np.repeat([0, 1], 28)
        ds = Dataset(values=values, labels=labels)
        err = mce(model, ds, np.arange(56))
        assert err == wrong / 56
        assert f"{err:.4f}" == expected

    def test_error_count_is_integer(self):
        ds = synthetic_gaussian((40, 40), 2, (0,), 1.0, "identity", 12)
        model = fit(ds, np.arange(60), (0, 1), "linear")
        idx = np.arange(60, 80)
        err = mce(model, ds, idx)
        assert err * len(idx) == pytest.approx(round(err * len(idx)), abs=1e-12)

    def test_empty_indices_rejected(self):
        model = self._model_and_test_sets()
        ds = synthetic_gaussian((3, 3), 1, (), 0.0, "identity", 0)
        with pytest.raises(ValidationError):
            mce(model, ds, [])


class TestMaxFeatures:
    def test_quadratic_bound(self):
        assert max_features((71, 89), "quadratic") == 70

    def test_linear_bound(self):
        assert max_features((80, 80), "linear") == 158

    def test_boundary(self):
        assert max_features((2, 2), "quadratic") == 1

    def test_validation(self):
        with pytest.raises(ValidationError):
            max_features((1, 5), "quadratic")
        with pytest.raises(ValidationError):
            max_features((5, 5), "diagonal")
