"""Shared test doubles and independent oracles.

The oracles here deliberately avoid the package's vectorized code paths:
splits are found by exhaustive search, Shapley values by explicit coalition
tables, gradients by central differences.
"""

from __future__ import annotations

import numpy as np

from tsxfidel.models.base import ForecastModel
from tsxfidel.models.tree import LEAF, RegressionTree


class LinearWindowModel(ForecastModel):
    """f_tau(x) = bias[tau] + sum_jl weights[tau, j, l] * x[j, l]."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray | None = None):
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.ndim == 2:
            self.weights = self.weights[None, :, :]
        self.bias = np.zeros(self.weights.shape[0]) if bias is None else np.asarray(bias, dtype=np.float64)

    @property
    def window_shape(self) -> tuple[int, int]:
        return self.weights.shape[1], self.weights.shape[2]

    @property
    def n_horizons(self) -> int:
        return self.weights.shape[0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X.reshape(X.shape[0], *self.window_shape)
        return np.einsum("njl,tjl->nt", X, self.weights) + self.bias


class ConstantModel(ForecastModel):
    """Ignores its input entirely."""

    def __init__(self, value: float, shape: tuple[int, int], horizons: int = 1):
        self.value = value
        self._shape = shape
        self._horizons = horizons

    @property
    def window_shape(self) -> tuple[int, int]:
        return self._shape

    @property
    def n_horizons(self) -> int:
        return self._horizons

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.full((X.shape[0], self._horizons), self.value)


def brute_force_best_split(
    X: np.ndarray, residuals: np.ndarray, min_samples_leaf: int = 1
) -> tuple[float, int, float] | None:
    """Exhaustive (improvement, feature, threshold) search with the same
    tie-break as the fitter: lowest feature index, then lowest threshold."""
    best = None
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            threshold = (lo + hi) / 2.0
            left = X[:, f] <= threshold
            n_l, n_r = int(left.sum()), int((~left).sum())
            if n_l < min_samples_leaf or n_r < min_samples_leaf:
                continue
            improvement = n_l * n_r / (n_l + n_r) * (residuals[left].mean() - residuals[~left].mean()) ** 2
            if best is None or improvement > best[0]:
                best = (improvement, f, threshold)
    return best


def assert_tree_matches_oracle(
    tree: RegressionTree, X: np.ndarray, residuals: np.ndarray, min_samples_leaf: int = 1
) -> None:
    """Walk the tree and require every internal node to match the brute-force
    best split on that node's samples; leaves must predict sample means."""

    def visit(node: int, idx: np.ndarray) -> None:
        assert np.isclose(tree.value[node], residuals[idx].mean()), f"node {node} value off"
        if tree.feature[node] == LEAF:
            return
        oracle = brute_force_best_split(X[idx], residuals[idx], min_samples_leaf)
        assert oracle is not None and oracle[0] > 0.0, f"node {node} split where oracle finds none"
        assert tree.feature[node] == oracle[1], f"node {node}: feature {tree.feature[node]} != {oracle[1]}"
        assert np.isclose(tree.threshold[node], oracle[2]), f"node {node}: threshold mismatch"
        go_left = X[idx, tree.feature[node]] <= tree.threshold[node]
        visit(tree.left[node], idx[go_left])
        visit(tree.right[node], idx[~go_left])

    visit(0, np.arange(X.shape[0]))


def finite_difference_gradients(loss_fn, weights: dict[str, np.ndarray], step: float = 1e-5) -> dict[str, np.ndarray]:
    """Central finite differences of ``loss_fn()`` w.r.t. every weight entry.

    ``loss_fn`` must read the (mutated in place) ``weights`` mapping.
    """
    grads = {}
    for key, array in weights.items():
        grad = np.zeros_like(array)
        flat = array.ravel()
        flat_grad = grad.ravel()
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            up = loss_fn()
            flat[i] = original - step
            down = loss_fn()
            flat[i] = original
            flat_grad[i] = (up - down) / (2.0 * step)
        grads[key] = grad
    return grads
