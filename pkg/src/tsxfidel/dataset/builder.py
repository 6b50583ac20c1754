"""Dataset assembly: normalization, framing, splitting, pooling.

Pipeline per series: generate calendar covariates, min-max scale the target
onto [0, 1], standardize the remaining features with statistics from the
training time range, frame sliding windows, split chronologically. Pools and
per-series feature means are then built from the training side only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from tsxfidel._rng import keyed_rng
from tsxfidel.dataset.covariates import generate_time_covariates
from tsxfidel.dataset.pool import AblationPool, build_pool
from tsxfidel.dataset.schema import FeatureSpec, MinMaxScaler, RawSeries
from tsxfidel.dataset.windows import WindowInstance, frame_windows, split_train_test
from tsxfidel.errors import ConstantTargetError, EmptySplitError, NotEnoughSeriesError


@dataclass
class FramedDataset:
    """Immutable windows plus the training-side statistics evaluators need."""

    train: list[WindowInstance]
    test: list[WindowInstance]
    scalers: dict[str, MinMaxScaler]
    global_means: dict[str, np.ndarray]
    feature_specs: tuple[FeatureSpec, ...]
    pool: AblationPool
    window_len: int
    horizons: int

    @property
    def window_shape(self) -> tuple[int, int]:
        return len(self.feature_specs), self.window_len


def normalize_target(series: RawSeries) -> tuple[RawSeries, MinMaxScaler]:
    """Map the target column onto [0, 1]; the scaler keeps original bounds."""
    target = series.target_index
    column = series.values[:, target]
    lo, hi = float(column.min()), float(column.max())
    if hi <= lo:
        raise ConstantTargetError(f"series {series.series_id!r}: target is constant at {lo}")
    scaler = MinMaxScaler(minimum=lo, maximum=hi)
    values = series.values.copy()
    values[:, target] = scaler.transform(column)
    return series.with_values(values), scaler


def sample_series(all_series: list[RawSeries], n: int, seed: int) -> list[RawSeries]:
    """Uniform sample of ``n`` series without replacement, deterministic per seed.

    The selection keeps the original ordering of the chosen series.
    """
    if n > len(all_series):
        raise NotEnoughSeriesError(f"asked for {n} series, only {len(all_series)} available")
    rng = keyed_rng(seed, "sample-series")
    chosen = sorted(rng.choice(len(all_series), size=n, replace=False).tolist())
    return [all_series[i] for i in chosen]


def _standardize_non_target(series: RawSeries, train_len: int) -> RawSeries:
    """Zero-mean, unit-variance scaling of non-target features.

    Statistics come from the first ``train_len`` time steps (the range covered
    by training-window inputs). Constant features are centered only.
    """
    target = series.target_index
    values = series.values.copy()
    head = values[:train_len]
    for j in range(series.n_features):
        if j == target:
            continue
        mean = head[:, j].mean()
        std = head[:, j].std()
        if std == 0.0:
            std = 1.0
        values[:, j] = (values[:, j] - mean) / std
    return series.with_values(values)


def build_framed_dataset(
    series_list: list[RawSeries],
    window_len: int,
    horizons: int,
    split_ratio: float = 0.8,
    add_time_covariates: bool = True,
) -> FramedDataset:
    """Run the full framing pipeline over one or more series."""
    if not series_list:
        raise ValueError("no series to frame")

    train: list[WindowInstance] = []
    test: list[WindowInstance] = []
    scalers: dict[str, MinMaxScaler] = {}
    global_means: dict[str, np.ndarray] = {}
    feature_specs: tuple[FeatureSpec, ...] | None = None

    for series in series_list:
        if add_time_covariates:
            series = generate_time_covariates(series)
        if feature_specs is None:
            feature_specs = series.feature_specs
        elif series.feature_specs != feature_specs:
            raise ValueError(f"series {series.series_id!r} has a different schema than the first series")

        series, scaler = normalize_target(series)
        scalers[series.series_id] = scaler

        n_windows = series.length - window_len - horizons + 1
        if n_windows < 2:
            raise EmptySplitError(f"series {series.series_id!r} frames only {max(n_windows, 0)} windows")
        n_train = math.floor(split_ratio * n_windows)
        train_len = n_train + window_len - 1  # time steps seen by training-window inputs

        series = _standardize_non_target(series, train_len)
        global_means[series.series_id] = series.values[:train_len].mean(axis=0)

        windows = frame_windows(series, window_len, horizons)
        series_train, series_test = split_train_test(windows, split_ratio)
        train.extend(series_train)
        test.extend(series_test)

    return FramedDataset(
        train=train,
        test=test,
        scalers=scalers,
        global_means=global_means,
        feature_specs=feature_specs,
        pool=build_pool(train),
        window_len=window_len,
        horizons=horizons,
    )
