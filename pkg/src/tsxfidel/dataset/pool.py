"""Per-feature replacement pools for marginal ablation sampling."""

from __future__ import annotations

import numpy as np

from tsxfidel.dataset.windows import WindowInstance


class AblationPool:
    """Empirical marginal distribution of each feature over training windows.

    The pool for feature j is the multiset of every cell of row j across all
    training windows, so a uniform draw from it is a draw from the feature's
    empirical marginal (overlapping windows weight values accordingly).
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] == 0:
            raise ValueError("pool values must be a non-empty (J, M) array")
        self.values = values
        self.values.setflags(write=False)

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def size(self) -> int:
        return self.values.shape[1]

    def draw(self, feature: int, rng: np.random.Generator, size: int | None = None) -> float | np.ndarray:
        """Uniform draw(s) from feature ``feature``'s pool."""
        idx = rng.integers(0, self.size, size=size)
        return self.values[feature, idx]

    def draw_cells(self, features: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One draw per entry of ``features`` (an array of feature indices)."""
        features = np.asarray(features, dtype=np.intp)
        idx = rng.integers(0, self.size, size=features.shape)
        return self.values[features, idx]

    def draw_windows(self, n: int, window_len: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` full replacement windows of shape (n, J, window_len)."""
        idx = rng.integers(0, self.size, size=(n, self.n_features, window_len))
        rows = np.arange(self.n_features)[None, :, None]
        return self.values[rows, idx]


def build_pool(train: list[WindowInstance]) -> AblationPool:
    """Pool every cell of every training window, feature by feature."""
    if not train:
        raise ValueError("cannot build a pool from zero training windows")
    stacked = np.stack([w.x for w in train])  # (N, J, L)
    n, j, l = stacked.shape
    return AblationPool(stacked.transpose(1, 0, 2).reshape(j, n * l))
