from __future__ import annotations

import pytest

from tsxfidel.dataset import SyntheticConfig, build_framed_dataset, make_synthetic
from tsxfidel.models import fit_gbr


@pytest.fixture(scope="session")
def driver_dataset():
    """Small framed dataset with a dominant lagged driver (feature 1)."""
    config = SyntheticConfig(
        n_series=1,
        length=260,
        n_features=3,
        driver_feature=1,
        driver_coefficient=0.9,
        driver_lag=3,
        noise_std=0.02,
        feature_noise_std=0.05,
    )
    series = make_synthetic(config, seed=101)
    return build_framed_dataset(series, window_len=6, horizons=3, add_time_covariates=False)


@pytest.fixture(scope="session")
def driver_gbr(driver_dataset):
    """A quickly fitted boosted model for unit tests (not the full budget)."""
    return fit_gbr(driver_dataset.train, n_trees=40, learning_rate=0.05, max_depth=3)
