"""Importance matrices, cell rankings, and the simple explainers.

An explainer assigns a signed score to every window cell (j, l) for one
forecast horizon. Rankings sort those scores in either direction with a
deterministic lexicographic tie-break on (j, l).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from tsxfidel.models.base import ForecastModel
from tsxfidel.validation import check_window


class Direction(enum.Enum):
    MOST_POSITIVE = "most_positive"
    MOST_NEGATIVE = "most_negative"


class ReplacementScheme(enum.Enum):
    LOCAL_MEAN = "local-mean"
    GLOBAL_MEAN = "global-mean"
    MARGINAL_DRAW = "marginal-draw"


@dataclass(frozen=True)
class ImportanceMatrix:
    """Per-cell signed attribution scores for a single horizon.

    ``base_value`` is only set by Shapley-style explainers, where it is the
    expected prediction over replacement draws.
    """

    phi: np.ndarray
    horizon: int
    method: str
    base_value: float | None = None

    def __post_init__(self) -> None:
        phi = np.asarray(self.phi, dtype=np.float64)
        object.__setattr__(self, "phi", phi)
        if phi.ndim != 2:
            raise ValueError("phi must be a (J, L) matrix")
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi contains non-finite entries")
        phi.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.phi.shape


@dataclass(frozen=True)
class Ranking:
    """A permutation of all J*L cells, most relevant first."""

    cells: np.ndarray  # (P, 2) rows of (j, l)
    direction: Direction

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=np.intp)
        object.__setattr__(self, "cells", cells)
        cells.setflags(write=False)

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    def flat(self, window_len: int) -> np.ndarray:
        """Cell order as flat indices j * L + l."""
        return self.cells[:, 0] * window_len + self.cells[:, 1]


def rank_cells(importance: ImportanceMatrix, direction: Direction) -> Ranking:
    """Sort cells by score (descending for MOST_POSITIVE, ascending otherwise)."""
    j_count, l_count = importance.shape
    jj, ll = np.meshgrid(np.arange(j_count), np.arange(l_count), indexing="ij")
    scores = importance.phi.ravel()
    key = -scores if direction is Direction.MOST_POSITIVE else scores
    # lexsort's last key dominates; earlier keys break ties in (j, l) order.
    order = np.lexsort((ll.ravel(), jj.ravel(), key))
    return Ranking(cells=np.column_stack([jj.ravel()[order], ll.ravel()[order]]), direction=direction)


def local_mean(x: np.ndarray, feature: int) -> float:
    """Mean of one feature row over the window slices."""
    x = check_window(x)
    return float(x[feature].mean())


def global_mean(feature_means: np.ndarray, feature: int) -> float:
    """Time-invariant training mean of one feature (precomputed per series)."""
    return float(np.asarray(feature_means)[feature])


def training_feature_means(values: np.ndarray, train_len: int) -> np.ndarray:
    """Per-feature means over the first ``train_len`` steps of a (T, J) matrix."""
    return np.asarray(values, dtype=np.float64)[:train_len].mean(axis=0)


def explain_random(x: np.ndarray, horizon: int, seed: int | np.random.Generator) -> ImportanceMatrix:
    """Uniform(-1, 1) scores per cell: a uniformly random ranking either way."""
    x = check_window(x)
    rng = np.random.default_rng(seed)
    return ImportanceMatrix(phi=rng.uniform(-1.0, 1.0, size=x.shape), horizon=horizon, method="random")


def explain_omission(
    model: ForecastModel,
    x: np.ndarray,
    horizon: int,
    scheme: ReplacementScheme,
    global_means: np.ndarray | None = None,
) -> ImportanceMatrix:
    """Score each cell as the prediction drop when it is replaced by a mean.

    Costs exactly J*L + 1 model evaluations, batched into a single call.
    """
    x = check_window(x, model.window_shape)
    j_count, l_count = x.shape
    if scheme is ReplacementScheme.LOCAL_MEAN:
        means = x.mean(axis=1)
    elif scheme is ReplacementScheme.GLOBAL_MEAN:
        if global_means is None:
            raise ValueError("GLOBAL_MEAN omission needs per-feature training means")
        means = np.asarray(global_means, dtype=np.float64)
        if means.shape != (j_count,):
            raise ValueError(f"expected {j_count} feature means, got shape {means.shape}")
    else:
        raise ValueError(f"omission supports mean replacement only, not {scheme}")

    batch = np.tile(x, (j_count * l_count + 1, 1, 1))
    for j in range(j_count):
        for l in range(l_count):
            batch[1 + j * l_count + l, j, l] = means[j]
    preds = model.predict_horizon(batch, horizon)
    phi = (preds[0] - preds[1:]).reshape(j_count, l_count)
    method = "omission-local" if scheme is ReplacementScheme.LOCAL_MEAN else "omission-global"
    return ImportanceMatrix(phi=phi, horizon=horizon, method=method)
