"""The multi-horizon forecaster contract shared by all models."""

from __future__ import annotations

import abc

import numpy as np

from tsxfidel.validation import check_window


class ForecastModel(abc.ABC):
    """A fitted predictor mapping a (J, L) window to t0 horizon values.

    ``predict`` is pure: deterministic and side-effect-free, so fitted models
    can serve any number of concurrent evaluation workers.
    """

    @property
    @abc.abstractmethod
    def window_shape(self) -> tuple[int, int]:
        """(n_features, window_len)."""

    @property
    @abc.abstractmethod
    def n_horizons(self) -> int:
        """Number of forecast steps t0."""

    @abc.abstractmethod
    def predict(self, X: np.ndarray) -> np.ndarray:
        """Predict a batch: (N, J, L) or (N, J*L) in, (N, t0) out."""

    def predict_horizon(self, X: np.ndarray, horizon: int) -> np.ndarray:
        """Predict a single 0-based horizon for a batch; (N,) out.

        Subclasses may override this when one horizon is cheaper than all.
        """
        return self.predict(X)[:, horizon]

    def predict_window(self, x: np.ndarray) -> np.ndarray:
        """Predict one (J, L) window; (t0,) out."""
        x = check_window(x, self.window_shape)
        return self.predict(x[None, :, :])[0]
