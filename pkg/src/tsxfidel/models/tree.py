"""Regression trees with Friedman-MSE split selection.

Splits maximize the Friedman improvement score
``i2 = w_l * w_r / (w_l + w_r) * (mean_l - mean_r)^2`` over all
(feature, threshold) pairs, with thresholds at midpoints between consecutive
distinct feature values. Ties break toward the lowest feature index, then the
lowest threshold, so fitting is fully deterministic. Leaves predict sample
means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass
class RegressionTree:
    """Array-encoded binary tree. ``feature[i] == -1`` marks node i a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    max_depth: int

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Evaluate the tree on an (N, P) design matrix."""
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0], dtype=np.float64)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            if self.feature[node] == LEAF:
                out[idx] = self.value[node]
                continue
            go_left = X[idx, self.feature[node]] <= self.threshold[node]
            stack.append((self.left[node], idx[go_left]))
            stack.append((self.right[node], idx[~go_left]))
        return out


def friedman_improvement(n_left: int, n_right: int, mean_left: float, mean_right: float) -> float:
    """Friedman improvement score for a candidate split (unit sample weights)."""
    return n_left * n_right / (n_left + n_right) * (mean_left - mean_right) ** 2


def _canonical_improvement(values: np.ndarray, residuals: np.ndarray, threshold: float) -> float:
    """Improvement computed from masked means in node sample order.

    This is the arithmetic any direct implementation uses, so two candidates
    that induce the same partition (possibly via different features) score
    bit-identically and the deterministic tie-break is meaningful.
    """
    left = values <= threshold
    n_left = int(left.sum())
    n_right = values.shape[0] - n_left
    return friedman_improvement(n_left, n_right, residuals[left].mean(), residuals[~left].mean())


def _best_split_for_feature(
    values: np.ndarray, residuals: np.ndarray, min_samples_leaf: int
) -> tuple[float, float] | None:
    """Best (improvement, threshold) along one feature column, or None."""
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    v = values[order]
    r = residuals[order]

    prefix = np.cumsum(r)
    total = prefix[-1]
    counts = np.arange(1, n, dtype=np.float64)  # size of the left side at cut k

    # Candidate cuts sit between strictly increasing consecutive values.
    valid = v[1:] > v[:-1]
    valid &= counts >= min_samples_leaf
    valid &= (n - counts) >= min_samples_leaf
    if not valid.any():
        return None

    mean_left = prefix[:-1] / counts
    mean_right = (total - prefix[:-1]) / (n - counts)
    improvement = np.where(valid, counts * (n - counts) / n * (mean_left - mean_right) ** 2, -np.inf)

    # The prefix-sum scores carry last-ulp noise, so rescore every candidate
    # within a whisker of the maximum canonically; the first (lowest
    # threshold) strictly-best canonical score wins.
    top = float(improvement.max())
    shortlist = np.flatnonzero(improvement >= top - 1e-9 * abs(top) - 1e-300)
    best: tuple[float, float] | None = None
    for k in shortlist:
        threshold = float((v[k] + v[k + 1]) / 2.0)
        score = _canonical_improvement(values, residuals, threshold)
        if best is None or score > best[0]:
            best = (score, threshold)
    return best


def fit_tree(
    inputs: np.ndarray,
    residuals: np.ndarray,
    max_depth: int,
    min_samples_leaf: int = 1,
) -> RegressionTree:
    """Greedy top-down CART fit of ``residuals`` on an (N, P) design matrix.

    Nodes that cannot improve (constant residuals, no admissible cut, or a
    non-positive best score) become leaves.
    """
    X = np.asarray(inputs, dtype=np.float64)
    r = np.asarray(residuals, dtype=np.float64)
    if X.ndim != 2 or r.shape != (X.shape[0],):
        raise ValueError("inputs must be (N, P) with matching length-N residuals")
    if X.shape[0] < 1:
        raise ValueError("cannot fit a tree on zero samples")

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node(mean: float) -> int:
        feature.append(LEAF)
        threshold.append(np.nan)
        left.append(LEAF)
        right.append(LEAF)
        value.append(mean)
        return len(feature) - 1

    def build(idx: np.ndarray, depth: int) -> int:
        node = new_node(float(r[idx].mean()))
        n = idx.shape[0]
        if depth >= max_depth or n < 2 * min_samples_leaf or np.all(r[idx] == r[idx[0]]):
            return node

        best: tuple[float, int, float] | None = None  # (improvement, feature, threshold)
        for f in range(X.shape[1]):
            found = _best_split_for_feature(X[idx, f], r[idx], min_samples_leaf)
            if found is not None and (best is None or found[0] > best[0]):
                best = (found[0], f, found[1])
        if best is None or best[0] <= 0.0:
            return node

        _, f, cut = best
        go_left = X[idx, f] <= cut
        feature[node] = f
        threshold[node] = cut
        left[node] = build(idx[go_left], depth + 1)
        right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(X.shape[0]), 0)
    return RegressionTree(
        feature=np.asarray(feature, dtype=np.intp),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.intp),
        right=np.asarray(right, dtype=np.intp),
        value=np.asarray(value, dtype=np.float64),
        max_depth=max_depth,
    )
