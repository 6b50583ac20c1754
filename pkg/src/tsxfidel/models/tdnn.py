"""Feed-forward time-delay forecaster trained with Adam on RMSE loss.

Architecture: flattened window -> dense(hidden, sigmoid) -> dense(hidden,
sigmoid) -> dense(t0, linear), all horizons emitted at once. Weights start
uniform in [-init_scale, init_scale] so the untrained network predicts close
to its output bias. The RMSE gradient is the MSE gradient scaled by
1 / (2 * RMSE) per batch; both losses share their optimum.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from tsxfidel._rng import keyed_rng
from tsxfidel.dataset.windows import WindowInstance, windows_to_arrays
from tsxfidel.errors import DivergedLossError, EmptyTrainingSetError
from tsxfidel.models.base import ForecastModel
from tsxfidel.validation import as_design_matrix

WEIGHT_KEYS = ("w1", "b1", "w2", "b2", "w3", "b3")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class TimeDelayForecaster(ForecastModel, RegressorMixin, BaseEstimator):
    """Two-hidden-layer MIMO forecaster on flattened windows."""

    def __init__(
        self,
        hidden_units: int = 64,
        epochs: int = 300,
        batch_size: int = 32,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
        init_scale: float = 0.05,
        seed: int = 0,
    ):
        self.hidden_units = hidden_units
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.init_scale = init_scale
        self.seed = seed

    def fit(self, X: np.ndarray, Y: np.ndarray) -> "TimeDelayForecaster":
        """Train on an (N, J, L) window stack and (N, t0) targets.

        ``epochs=0`` initializes weights and returns without updates, which is
        the canonical untrained baseline.
        """
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 3:
            raise ValueError("fit expects X with shape (N, J, L)")
        if X.shape[0] == 0:
            raise EmptyTrainingSetError("no training windows")
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim == 1:
            Y = Y[:, None]

        self.window_shape_ = (X.shape[1], X.shape[2])
        self.n_horizons_ = Y.shape[1]
        design = X.reshape(X.shape[0], -1)
        self._init_weights(design.shape[1])

        rng = keyed_rng(self.seed, "tdnn-batches")
        adam_m = {k: np.zeros_like(w) for k, w in self.weights_.items()}
        adam_v = {k: np.zeros_like(w) for k, w in self.weights_.items()}
        step = 0
        n = design.shape[0]
        history = []
        for _ in range(self.epochs):
            order = rng.permutation(n)
            epoch_losses = []
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                loss, grads = self.loss_and_gradients(design[batch], Y[batch])
                if not np.isfinite(loss):
                    raise DivergedLossError(f"training loss became {loss} at step {step}")
                epoch_losses.append(loss)
                step += 1
                for key, grad in grads.items():
                    adam_m[key] = self.beta1 * adam_m[key] + (1.0 - self.beta1) * grad
                    adam_v[key] = self.beta2 * adam_v[key] + (1.0 - self.beta2) * grad**2
                    m_hat = adam_m[key] / (1.0 - self.beta1**step)
                    v_hat = adam_v[key] / (1.0 - self.beta2**step)
                    self.weights_[key] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)
            if epoch_losses:
                history.append(float(np.mean(epoch_losses)))
        self.adam_state_ = {"m": adam_m, "v": adam_v, "step": step}
        self.loss_history_ = history
        return self

    def _init_weights(self, n_inputs: int) -> None:
        rng = keyed_rng(self.seed, "tdnn-init")
        h = self.hidden_units
        scale = self.init_scale
        self.weights_ = {
            "w1": rng.uniform(-scale, scale, size=(n_inputs, h)),
            "b1": np.zeros(h),
            "w2": rng.uniform(-scale, scale, size=(h, h)),
            "b2": np.zeros(h),
            "w3": rng.uniform(-scale, scale, size=(h, self.n_horizons_)),
            "b3": np.zeros(self.n_horizons_),
        }

    def _forward(self, design: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        w = self.weights_
        a1 = _sigmoid(design @ w["w1"] + w["b1"])
        a2 = _sigmoid(a1 @ w["w2"] + w["b2"])
        out = a2 @ w["w3"] + w["b3"]
        return a1, a2, out

    def loss_and_gradients(self, design: np.ndarray, Y: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
        """RMSE over the batch and its gradient for every weight array."""
        w = self.weights_
        a1, a2, out = self._forward(design)
        err = out - Y
        rmse = float(np.sqrt(np.mean(err**2)))

        if rmse == 0.0:
            g_out = np.zeros_like(err)
        else:
            g_out = err / (err.size * rmse)
        g_z2 = (g_out @ w["w3"].T) * a2 * (1.0 - a2)
        g_z1 = (g_z2 @ w["w2"].T) * a1 * (1.0 - a1)
        grads = {
            "w3": a2.T @ g_out,
            "b3": g_out.sum(axis=0),
            "w2": a1.T @ g_z2,
            "b2": g_z2.sum(axis=0),
            "w1": design.T @ g_z1,
            "b1": g_z1.sum(axis=0),
        }
        return rmse, grads

    def _check_fitted(self) -> None:
        if not hasattr(self, "weights_"):
            raise NotFittedError("TimeDelayForecaster is not fitted yet")

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
        return self._forward(design)[2]


def fit_tdnn(train: list[WindowInstance], **params) -> TimeDelayForecaster:
    """Fit a time-delay forecaster directly from training windows."""
    if not train:
        raise EmptyTrainingSetError("no training windows")
    X, Y = windows_to_arrays(train)
    return TimeDelayForecaster(**params).fit(X, Y)
