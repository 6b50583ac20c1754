"""Forecast performance scores: range-normalized RMSE and normalized deviation."""

from __future__ import annotations

import numpy as np

from tsxfidel.errors import DegenerateDenominatorError


def nrmse(y: np.ndarray, yhat: np.ndarray) -> float:
    """Root-mean-squared error divided by the observed target range."""
    y, yhat = _check_pair(y, yhat)
    spread = float(y.max() - y.min())
    if spread == 0.0:
        raise DegenerateDenominatorError("NRMSE undefined: max(y) == min(y)")
    return float(np.sqrt(np.mean((yhat - y) ** 2)) / spread)


def nd(y: np.ndarray, yhat: np.ndarray) -> float:
    """Sum of absolute errors divided by the sum of absolute targets."""
    y, yhat = _check_pair(y, yhat)
    denom = float(np.abs(y).sum())
    if denom == 0.0:
        raise DegenerateDenominatorError("ND undefined: sum(|y|) == 0")
    return float(np.abs(yhat - y).sum() / denom)


def _check_pair(y: np.ndarray, yhat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=np.float64).ravel()
    yhat = np.asarray(yhat, dtype=np.float64).ravel()
    if y.shape != yhat.shape or y.size == 0:
        raise ValueError(f"y and yhat must be equally sized and non-empty, got {y.shape} vs {yhat.shape}")
    return y, yhat
