"""Input validation helpers for window matrices and model batches."""

from __future__ import annotations

import numpy as np

from tsxfidel.errors import ShapeMismatchError


def check_window(x: np.ndarray, window_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Validate a single window matrix of shape (n_features, window_len)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"window must be 2-D (features x time), got ndim={arr.ndim}")
    if window_shape is not None and arr.shape != tuple(window_shape):
        raise ShapeMismatchError(f"window shape {arr.shape} does not match expected {tuple(window_shape)}")
    if not np.all(np.isfinite(arr)):
        raise ShapeMismatchError("window contains non-finite values")
    return arr


def as_window_batch(X: np.ndarray, window_shape: tuple[int, int]) -> np.ndarray:
    """Coerce a batch to shape (n, J, L).

    Accepts (n, J, L) stacks or (n, J*L) design matrices; single windows must
    go through ``check_window`` / ``predict_window`` instead, since a (J, L)
    matrix is ambiguous with a two-row design matrix.
    """
    arr = np.asarray(X, dtype=np.float64)
    j, l = window_shape
    if arr.ndim == 3:
        if arr.shape[1:] != (j, l):
            raise ShapeMismatchError(f"batch windows have shape {arr.shape[1:]}, expected {(j, l)}")
        return arr
    if arr.ndim == 2:
        if arr.shape[1] != j * l:
            raise ShapeMismatchError(f"design matrix has {arr.shape[1]} columns, expected {j * l}")
        return arr.reshape(arr.shape[0], j, l)
    raise ShapeMismatchError(f"batch must be 2-D or 3-D, got ndim={arr.ndim}")


def as_design_matrix(X: np.ndarray, window_shape: tuple[int, int]) -> np.ndarray:
    """Coerce a batch to the flattened (n, J*L) form models consume."""
    batch = as_window_batch(X, window_shape)
    return batch.reshape(batch.shape[0], -1)
