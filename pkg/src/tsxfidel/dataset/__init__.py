"""Series ingestion, covariates, scaling, windowing and ablation pools."""

from tsxfidel.dataset.builder import (
    FramedDataset,
    build_framed_dataset,
    normalize_target,
    sample_series,
)
from tsxfidel.dataset.covariates import generate_time_covariates
from tsxfidel.dataset.loader import load_csv
from tsxfidel.dataset.pool import AblationPool, build_pool
from tsxfidel.dataset.schema import FeatureSpec, MinMaxScaler, RawSeries
from tsxfidel.dataset.synthetic import SyntheticConfig, make_synthetic, synthetic_feature_specs
from tsxfidel.dataset.windows import WindowInstance, frame_windows, split_train_test, windows_to_arrays

__all__ = [
    "AblationPool",
    "FeatureSpec",
    "FramedDataset",
    "MinMaxScaler",
    "RawSeries",
    "SyntheticConfig",
    "WindowInstance",
    "build_framed_dataset",
    "build_pool",
    "frame_windows",
    "generate_time_covariates",
    "load_csv",
    "make_synthetic",
    "normalize_target",
    "sample_series",
    "split_train_test",
    "synthetic_feature_specs",
    "windows_to_arrays",
]
