"""Effort regressors: ridge, random forest, random baseline, RMSE, dataset split."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, cg
from sklearn.ensemble import RandomForestRegressor

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InsufficientData,
    LengthMismatch,
    SingularSystem,
    TooFewRecords,
)
from .features import invert_targets

#: Above this many features the ridge solve switches to conjugate gradients.
_DENSE_SOLVE_LIMIT = 2000


# --- ridge regression -------------------------------------------------------


@dataclass
class RidgeModel:
    weights: np.ndarray
    intercept: float
    lam: float

    def get_state(self) -> dict:
        return {"weights": self.weights, "intercept": self.intercept, "lam": self.lam}

    @classmethod
    def from_state(cls, state: dict) -> "RidgeModel":
        return cls(
            weights=np.asarray(state["weights"], dtype=np.float64),
            intercept=float(state["intercept"]),
            lam=float(state["lam"]),
        )


def ridge_fit(X: sparse.spmatrix, y: np.ndarray, lam: float = 1.0) -> RidgeModel:
    """Minimize ||Xw + b - y||^2 + lam*||w||^2 with an unpenalized intercept.

    Solved on centered data: dense normal equations for narrow matrices,
    conjugate gradients on the implicit centered operator for wide ones.
    """
    X = sparse.csr_matrix(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    if n != len(y):
        raise DimensionMismatch(f"X has {n} rows but y has {len(y)} values")
    if n < 1:
        raise EmptyInput("ridge_fit needs at least one sample")
    x_mean = np.asarray(X.mean(axis=0)).ravel()
    y_mean = float(y.mean())
    y_c = y - y_mean
    rhs = X.T @ y_c  # equals centered-X^T centered-y because y_c sums to zero
    if d <= _DENSE_SOLVE_LIMIT:
        gram = (X.T @ X).toarray() - n * np.outer(x_mean, x_mean)
        gram[np.diag_indices(d)] += lam
        try:
            weights = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            raise SingularSystem(
                "normal equations are singular at lambda=0; retry with lambda > 0"
            )
        if lam == 0.0 and not np.allclose(gram @ weights, rhs, atol=1e-6 * (1 + np.abs(rhs).max())):
            raise SingularSystem(
                "normal equations are singular at lambda=0; retry with lambda > 0"
            )
    else:
        def matvec(v: np.ndarray) -> np.ndarray:
            xv = X @ v
            return X.T @ xv - n * x_mean * float(x_mean @ v) + lam * v

        op = LinearOperator((d, d), matvec=matvec, dtype=np.float64)
        weights, info = cg(op, rhs, rtol=1e-10, atol=0.0, maxiter=10 * d)
        if info != 0:
            if lam == 0.0:
                raise SingularSystem(
                    "conjugate gradients failed to converge at lambda=0; retry with lambda > 0"
                )
            weights, info = cg(op, rhs, rtol=1e-8, atol=0.0, maxiter=50 * d)
    intercept = y_mean - float(x_mean @ weights)
    return RidgeModel(weights=weights, intercept=intercept, lam=lam)


def ridge_predict(model: RidgeModel, X: sparse.spmatrix) -> np.ndarray:
    X = sparse.csr_matrix(X, dtype=np.float64)
    if X.shape[1] != len(model.weights):
        raise DimensionMismatch(
            f"X has {X.shape[1]} features but the model expects {len(model.weights)}"
        )
    return X @ model.weights + model.intercept


# --- random forest ----------------------------------------------------------


@dataclass
class ForestParams:
    trees: int = 100
    max_depth: Optional[int] = None
    min_leaf: int = 1
    feature_frac: float = 1.0
    seed: int = 0


@dataclass
class ForestModel:
    params: ForestParams
    n_features: int
    constant: Optional[float] = None
    forest: Optional[RandomForestRegressor] = None

    def get_state(self) -> dict:
        return {
            "params": self.params,
            "n_features": self.n_features,
            "constant": self.constant,
            "forest": self.forest,
        }

    @classmethod
    def from_state(cls, state: dict) -> "ForestModel":
        return cls(**state)


def forest_fit(X: sparse.spmatrix, y: np.ndarray, params: ForestParams | None = None) -> ForestModel:
    """Bagged regression trees on sparse features; depth 0 degenerates to the mean."""
    params = params or ForestParams()
    X = sparse.csr_matrix(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] != len(y):
        raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {len(y)} values")
    if len(y) < 1:
        raise EmptyInput("forest_fit needs at least one sample")
    if params.max_depth == 0:
        return ForestModel(params=params, n_features=X.shape[1], constant=float(y.mean()))
    forest = RandomForestRegressor(
        n_estimators=params.trees,
        max_depth=params.max_depth,
        min_samples_leaf=params.min_leaf,
        max_features=params.feature_frac,
        random_state=params.seed,
        n_jobs=1,
    )
    forest.fit(X, y)
    return ForestModel(params=params, n_features=X.shape[1], forest=forest)


def forest_predict(model: ForestModel, X: sparse.spmatrix) -> np.ndarray:
    X = sparse.csr_matrix(X, dtype=np.float64)
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"X has {X.shape[1]} features but the model expects {model.n_features}"
        )
    if model.constant is not None:
        return np.full(X.shape[0], model.constant)
    return model.forest.predict(X)


# --- random baseline ---------------------------------------------------------


@dataclass
class BaselineModel:
    """Draws log-space predictions from the training target distribution."""

    mu: float
    sigma: float

    def get_state(self) -> dict:
        return {"mu": self.mu, "sigma": self.sigma}

    @classmethod
    def from_state(cls, state: dict) -> "BaselineModel":
        return cls(mu=float(state["mu"]), sigma=float(state["sigma"]))


def baseline_fit(y_log: Sequence[float]) -> BaselineModel:
    """Store mean and standard deviation of the log-space training targets."""
    y_log = np.asarray(y_log, dtype=np.float64)
    if len(y_log) < 2:
        raise InsufficientData("baseline needs at least two training targets")
    return BaselineModel(mu=float(y_log.mean()), sigma=float(y_log.std()))


def baseline_predict_log(model: BaselineModel, n: int, seed: int = 0) -> np.ndarray:
    """i.i.d. draws from Normal(mu, sigma) in log space."""
    rng = np.random.default_rng(seed)
    return rng.normal(model.mu, model.sigma, size=n)


def baseline_predict(model: BaselineModel, n: int, seed: int = 0) -> np.ndarray:
    """Log-space draws inverted to original space and clamped at 0."""
    return invert_targets(baseline_predict_log(model, n, seed))


# --- evaluation ---------------------------------------------------------------


def evaluate(predictions: Sequence[float], actuals: Sequence[float]) -> float:
    """Root mean squared error, in whatever space the caller passes."""
    predictions = np.asarray(predictions, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    if len(predictions) != len(actuals):
        raise LengthMismatch(
            f"{len(predictions)} predictions vs {len(actuals)} actuals"
        )
    if len(predictions) == 0:
        raise EmptyInput("evaluate needs at least one pair")
    return float(np.sqrt(np.mean((actuals - predictions) ** 2)))


# --- dataset split -------------------------------------------------------------

# 64-bit linear congruential generator (Knuth's MMIX constants); documented in
# SPLIT.md so that other implementations reproduce identical partitions.
_LCG_A = 6364136223846793005
_LCG_C = 1442695040888963407
_LCG_MASK = (1 << 64) - 1


class SplitRng:
    def __init__(self, seed: int) -> None:
        self.state = seed & _LCG_MASK
        self._advance()

    def _advance(self) -> None:
        self.state = (_LCG_A * self.state + _LCG_C) & _LCG_MASK

    def below(self, bound: int) -> int:
        self._advance()
        return (self.state >> 33) % bound


def shuffled_indices(n: int, seed: int) -> list[int]:
    """Fisher-Yates permutation of range(n) driven by the pinned LCG."""
    rng = SplitRng(seed)
    indices = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        indices[i], indices[j] = indices[j], indices[i]
    return indices


def split_indices(n: int, seed: int) -> tuple[list[int], list[int], list[int]]:
    """80/10/10 contiguous partition of the shuffled order; remainder goes to train."""
    if n < 10:
        raise TooFewRecords(f"need at least 10 records to split, got {n}")
    order = shuffled_indices(n, seed)
    tenth = n // 10
    train_n = n - 2 * tenth
    return order[:train_n], order[train_n : train_n + tenth], order[train_n + tenth :]


def split_dataset(records: Sequence, seed: int) -> tuple[list, list, list]:
    """Seeded uniform shuffle then 80/10/10 partition of arbitrary records."""
    train_idx, val_idx, test_idx = split_indices(len(records), seed)
    return (
        [records[i] for i in train_idx],
        [records[i] for i in val_idx],
        [records[i] for i in test_idx],
    )
