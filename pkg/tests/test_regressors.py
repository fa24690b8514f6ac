import math

import numpy as np
import pytest
from scipy import sparse

from presti.errors import (
    DimensionMismatch,
    EmptyInput,
    InsufficientData,
    LengthMismatch,
    SingularSystem,
    TooFewRecords,
)
from presti.regressors import (
    ForestParams,
    baseline_fit,
    baseline_predict,
    baseline_predict_log,
    evaluate,
    forest_fit,
    forest_predict,
    ridge_fit,
    ridge_predict,
    shuffled_indices,
    split_dataset,
    split_indices,
)


def _csr(rows):
    return sparse.csr_matrix(np.asarray(rows, dtype=np.float64))


class TestRidge:
    def test_exact_line_at_lambda_zero(self):
        model = ridge_fit(_csr([[1.0], [2.0]]), np.array([2.0, 4.0]), lam=0.0)
        assert model.weights[0] == pytest.approx(2.0, abs=1e-9)
        assert model.intercept == pytest.approx(0.0, abs=1e-9)

    def test_shrinkage_closed_form(self):
        # centered X and y: slope = sum(xy) / (sum(x^2) + lambda)
        x = np.array([-0.5, 0.5])
        y = np.array([-1.0, 1.0])
        model = ridge_fit(_csr(x[:, None]), y, lam=1.0)
        expected = float(x @ y) / (float(x @ x) + 1.0)
        assert model.weights[0] == pytest.approx(expected, abs=1e-12)
        assert model.intercept == pytest.approx(0.0, abs=1e-12)

    def test_constant_targets_intercept_only(self):
        X = _csr([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        model = ridge_fit(X, np.array([3.0, 3.0, 3.0]), lam=0.5)
        predictions = ridge_predict(model, X)
        assert np.allclose(predictions, 3.0, atol=1e-9)

    def test_singular_at_lambda_zero(self):
        # duplicated feature makes the normal equations singular
        X = _csr([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        with pytest.raises(SingularSystem):
            ridge_fit(X, np.array([1.0, 2.0, 3.5]), lam=0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            ridge_fit(_csr([[1.0], [2.0]]), np.array([1.0]))
        model = ridge_fit(_csr([[1.0], [2.0]]), np.array([1.0, 2.0]))
        with pytest.raises(DimensionMismatch):
            ridge_predict(model, _csr([[1.0, 2.0]]))

    def test_wide_matrix_cg_path_matches_dense_oracle(self):
        rng = np.random.default_rng(0)
        n, d = 40, 2500  # d above the dense-solve limit, so CG runs
        X = sparse.random(n, d, density=0.02, random_state=0, format="csr")
        y = rng.normal(size=n)
        lam = 0.5
        model = ridge_fit(X, y, lam=lam)
        # independent dense solve of the same centered normal equations
        Xd = X.toarray()
        Xc = Xd - Xd.mean(axis=0)
        yc = y - y.mean()
        w_oracle = np.linalg.solve(Xc.T @ Xc + lam * np.eye(d), Xc.T @ yc)
        b_oracle = y.mean() - Xd.mean(axis=0) @ w_oracle
        assert np.allclose(model.weights, w_oracle, atol=1e-6)
        assert model.intercept == pytest.approx(b_oracle, abs=1e-6)


class TestForest:
    def test_depth_zero_predicts_mean(self):
        X = _csr([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([1.0, 2.0, 3.0, 6.0])
        model = forest_fit(X, y, ForestParams(max_depth=0))
        assert np.allclose(forest_predict(model, X), 3.0)

    def test_same_seed_identical(self):
        rng = np.random.default_rng(1)
        X = sparse.random(60, 20, density=0.3, random_state=2, format="csr")
        y = rng.uniform(0, 5, size=60)
        params = ForestParams(trees=20, seed=11)
        a = forest_predict(forest_fit(X, y, params), X)
        b = forest_predict(forest_fit(X, y, params), X)
        assert np.array_equal(a, b)

    def test_learns_simple_signal(self):
        rng = np.random.default_rng(3)
        X = sparse.csr_matrix(rng.integers(0, 2, size=(200, 5)).astype(float))
        y = 3.0 * X.toarray()[:, 0] + rng.normal(0, 0.05, size=200)
        model = forest_fit(X, y, ForestParams(trees=30, seed=5))
        rmse = evaluate(forest_predict(model, X), y)
        assert rmse < 0.5

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            forest_fit(_csr([[1.0], [2.0]]), np.array([1.0]))


class TestBaseline:
    def test_constant_targets_constant_predictions(self):
        model = baseline_fit(np.log1p([4.0, 4.0, 4.0]))
        predictions = baseline_predict(model, 10, seed=3)
        assert np.allclose(predictions, 4.0)

    def test_fixed_seed_repeatable(self):
        model = baseline_fit(np.array([0.5, 1.5, 2.5]))
        assert np.array_equal(baseline_predict(model, 8, seed=4), baseline_predict(model, 8, seed=4))

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            baseline_fit(np.array([1.0]))

    def test_log_space_rmse_calibration_quick(self):
        # against matched normal test targets the log RMSE tends to sigma*sqrt(2)
        rng = np.random.default_rng(9)
        mu, sigma, n = 3.0, 0.5, 20_000
        model = baseline_fit(rng.normal(mu, sigma, size=n))
        draws = baseline_predict_log(model, n, seed=5)
        actual = rng.normal(mu, sigma, size=n)
        rmse = float(np.sqrt(np.mean((draws - actual) ** 2)))
        assert rmse == pytest.approx(sigma * math.sqrt(2), rel=0.05)

    def test_clamped_at_zero(self):
        model = baseline_fit(np.array([-5.0, -4.0, -6.0]))  # log-space values
        assert (baseline_predict(model, 100, seed=1) >= 0).all()


class TestEvaluate:
    def test_perfect_predictions(self):
        assert evaluate([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_computed(self):
        assert evaluate([0.0, 0.0], [3.0, 4.0]) == pytest.approx(math.sqrt(12.5))

    def test_single_pair(self):
        assert evaluate([5.0], [2.0]) == pytest.approx(3.0)

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            evaluate([1.0], [1.0, 2.0])
        with pytest.raises(EmptyInput):
            evaluate([], [])

    def test_non_negative_zero_iff_identical(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=30)
        b = a + rng.normal(0, 0.1, size=30)
        assert evaluate(a, a) == 0.0
        assert evaluate(a, b) > 0.0


class TestSplit:
    def test_sizes_100(self):
        train, val, test = split_indices(100, seed=1)
        assert (len(train), len(val), len(test)) == (80, 10, 10)

    def test_sizes_10(self):
        train, val, test = split_indices(10, seed=1)
        assert (len(train), len(val), len(test)) == (8, 1, 1)

    def test_remainder_goes_to_train(self):
        train, val, test = split_indices(107, seed=1)
        assert (len(train), len(val), len(test)) == (87, 10, 10)

    def test_partitions_disjoint_exhaustive(self):
        train, val, test = split_indices(53, seed=9)
        combined = sorted(train + val + test)
        assert combined == list(range(53))

    def test_same_seed_identical(self):
        assert split_indices(37, seed=5) == split_indices(37, seed=5)
        assert shuffled_indices(37, 5) == shuffled_indices(37, 5)

    def test_different_seed_differs(self):
        assert split_indices(37, seed=5) != split_indices(37, seed=6)

    def test_too_few_records(self):
        with pytest.raises(TooFewRecords):
            split_indices(9, seed=0)

    def test_split_dataset_carries_records(self):
        records = [f"r{i}" for i in range(20)]
        train, val, test = split_dataset(records, seed=3)
        assert len(train) == 16 and len(val) == 2 and len(test) == 2
        assert sorted(train + val + test) == sorted(records)
