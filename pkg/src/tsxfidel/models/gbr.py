"""Gradient-boosted regression trees, one independent model per horizon.

Each horizon is fit with the direct strategy: a constant intercept (the
horizon's mean target) followed by ``n_trees`` rounds of least-squares
boosting, where every round fits a depth-limited tree to the current
residuals and is added scaled by the learning rate. The prediction therefore
decomposes exactly as ``intercept + lr * sum(tree outputs)``.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from tsxfidel.dataset.windows import WindowInstance, windows_to_arrays
from tsxfidel.errors import EmptyTrainingSetError
from tsxfidel.models.base import ForecastModel
from tsxfidel.models.tree import RegressionTree, fit_tree
from tsxfidel.validation import as_design_matrix, as_window_batch


class GradientBoostedForecaster(ForecastModel, RegressorMixin, BaseEstimator):
    """Multi-horizon boosted-trees forecaster on flattened windows."""

    def __init__(
        self,
        n_trees: int = 100,
        learning_rate: float = 0.01,
        max_depth: int = 3,
        min_samples_leaf: int = 1,
    ):
        self.n_trees = n_trees
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf

    def fit(self, X: np.ndarray, Y: np.ndarray) -> "GradientBoostedForecaster":
        """Fit on an (N, J, L) window stack and (N, t0) targets."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 3:
            raise ValueError("fit expects X with shape (N, J, L)")
        if X.shape[0] == 0:
            raise EmptyTrainingSetError("no training windows")
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]

        design = X.reshape(X.shape[0], -1)
        self.window_shape_ = (X.shape[1], X.shape[2])
        self.n_horizons_ = Y.shape[1]
        self.intercepts_ = Y.mean(axis=0)
        self.trees_: list[list[RegressionTree]] = []
        for tau in range(self.n_horizons_):
            trees: list[RegressionTree] = []
            pred = np.full(X.shape[0], self.intercepts_[tau])
            for _ in range(self.n_trees):
                tree = fit_tree(design, Y[:, tau] - pred, self.max_depth, self.min_samples_leaf)
                pred += self.learning_rate * tree.predict(design)
                trees.append(tree)
            self.trees_.append(trees)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "trees_"):
            raise NotFittedError("GradientBoostedForecaster is not fitted yet")

    @property
    def window_shape(self) -> tuple[int, int]:
        self._check_fitted()
        return self.window_shape_

    @property
    def n_horizons(self) -> int:
        self._check_fitted()
        return self.n_horizons_

    def predict(self, X: np.ndarray) -> np.ndarray:
        self._check_fitted()
        design = as_design_matrix(X, self.window_shape_)
        out = np.empty((design.shape[0], self.n_horizons_), dtype=np.float64)
        for tau in range(self.n_horizons_):
            out[:, tau] = self._predict_design(design, tau)
        return out

    def predict_horizon(self, X: np.ndarray, horizon: int) -> np.ndarray:
        self._check_fitted()
        return self._predict_design(as_design_matrix(X, self.window_shape_), horizon)

    def _predict_design(self, design: np.ndarray, tau: int) -> np.ndarray:
        acc = np.full(design.shape[0], self.intercepts_[tau])
        for tree in self.trees_[tau]:
            acc += self.learning_rate * tree.predict(design)
        return acc

    def staged_predict(self, X: np.ndarray) -> Iterator[np.ndarray]:
        """Yield (N, t0) predictions after 0, 1, ..., n_trees boosting rounds."""
        self._check_fitted()
        design = as_design_matrix(X, self.window_shape_)
        acc = np.tile(self.intercepts_, (design.shape[0], 1))
        yield acc.copy()
        for m in range(self.n_trees):
            for tau in range(self.n_horizons_):
                acc[:, tau] += self.learning_rate * self.trees_[tau][m].predict(design)
            yield acc.copy()


def fit_gbr(
    train: list[WindowInstance],
    n_trees: int = 100,
    learning_rate: float = 0.01,
    max_depth: int = 3,
    min_samples_leaf: int = 1,
) -> GradientBoostedForecaster:
    """Fit a boosted forecaster directly from training windows."""
    if not train:
        raise EmptyTrainingSetError("no training windows")
    X, Y = windows_to_arrays(train)
    model = GradientBoostedForecaster(
        n_trees=n_trees,
        learning_rate=learning_rate,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
    )
    return model.fit(X, Y)
