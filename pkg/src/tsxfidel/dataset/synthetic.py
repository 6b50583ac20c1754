"""Synthetic multivariate series with a known driver-target relationship.

The target (feature 0) is a lagged linear function of one designated driver
feature, so explainer ground truth exists at desk scale: with zero target
noise, ``target[t] == coefficient * driver[t - lag]`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np

from tsxfidel._rng import keyed_rng
from tsxfidel.dataset.schema import FeatureSpec, Granularity, RawSeries


@dataclass(frozen=True)
class SyntheticConfig:
    n_series: int = 1
    length: int = 400
    n_features: int = 4
    driver_feature: int = 1
    driver_coefficient: float = 1.0
    driver_lag: int = 4
    noise_std: float = 0.0
    feature_noise_std: float = 0.05
    granularity: Granularity = "hourly"
    start: str = "2021-01-01T00:00"

    def __post_init__(self) -> None:
        if self.n_features < 2:
            raise ValueError("need at least a target and one driver feature")
        if not 1 <= self.driver_feature < self.n_features:
            raise ValueError(f"driver_feature must be in [1, {self.n_features - 1}]")
        if self.driver_lag < 1:
            raise ValueError("driver_lag must be >= 1")


def synthetic_feature_specs(config: SyntheticConfig) -> tuple[FeatureSpec, ...]:
    specs = [FeatureSpec(name="target", is_target=True)]
    specs += [FeatureSpec(name=f"cov{j}") for j in range(1, config.n_features)]
    return tuple(specs)


def make_synthetic(config: SyntheticConfig, seed: int) -> list[RawSeries]:
    """Generate ``config.n_series`` deterministic series for ``seed``."""
    from datetime import timedelta

    from tsxfidel.dataset.schema import GRANULARITY_STEP

    specs = synthetic_feature_specs(config)
    step = GRANULARITY_STEP[config.granularity]
    start = datetime.fromisoformat(config.start)
    timestamps = tuple(start + i * step for i in range(config.length))

    series_list = []
    for s in range(config.n_series):
        rng = keyed_rng(seed, "synthetic", s)
        T, J, lag = config.length, config.n_features, config.driver_lag
        t_grid = np.arange(-lag, T, dtype=np.float64)
        values = np.empty((T, J), dtype=np.float64)

        # Driver history extends `lag` steps before the observed range so the
        # target is defined from t = 0.
        columns_full: dict[int, np.ndarray] = {}
        for j in range(1, J):
            period = 24.0 * j
            phase = rng.uniform(0.0, 2.0 * np.pi)
            trend = rng.uniform(-0.2, 0.2) / max(T, 1)
            base = np.sin(2.0 * np.pi * t_grid / period + phase)
            noise = rng.normal(0.0, config.feature_noise_std, size=t_grid.shape)
            columns_full[j] = base + trend * t_grid + noise

        driver_full = columns_full[config.driver_feature]
        target_noise = rng.normal(0.0, config.noise_std, size=T) if config.noise_std > 0 else 0.0
        values[:, 0] = config.driver_coefficient * driver_full[:T] + target_noise
        for j in range(1, J):
            values[:, j] = columns_full[j][lag:]

        series_list.append(
            RawSeries(
                series_id=f"syn{s}",
                timestamps=timestamps,
                values=values,
                granularity=config.granularity,
                feature_specs=specs,
            )
        )
    return series_list
