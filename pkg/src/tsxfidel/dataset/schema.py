"""Core dataset types: feature schema, raw series, target scaler."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Literal

import numpy as np

from tsxfidel.errors import NonMonotonicTimestampsError, ShapeMismatchError

Granularity = Literal["hourly", "daily"]

GRANULARITY_STEP: dict[str, timedelta] = {
    "hourly": timedelta(hours=1),
    "daily": timedelta(days=1),
}

NUMERIC = "numeric"
CATEGORICAL = "categorical-encoded"


@dataclass(frozen=True)
class FeatureSpec:
    """Declares one column of a multivariate series.

    ``is_covariate`` marks calendar covariates generated from the timestamp;
    raw data columns (including the target) carry ``False``.
    """

    name: str
    kind: str = NUMERIC
    is_target: bool = False
    is_covariate: bool = False

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"unknown feature kind {self.kind!r}")


def validate_feature_specs(specs: tuple[FeatureSpec, ...] | list[FeatureSpec]) -> None:
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate feature names in schema: {names}")
    n_targets = sum(s.is_target for s in specs)
    if n_targets != 1:
        raise ValueError(f"schema must mark exactly one target feature, found {n_targets}")


@dataclass(frozen=True)
class MinMaxScaler:
    """Affine map of the target feature onto [0, 1].

    ``inverse_transform(transform(v)) == v`` within 1e-12 for v in range.
    """

    minimum: float
    maximum: float

    def __post_init__(self) -> None:
        if not self.maximum > self.minimum:
            raise ValueError(f"scaler requires max > min, got [{self.minimum}, {self.maximum}]")

    def transform(self, values: np.ndarray | float) -> np.ndarray | float:
        return (values - self.minimum) / (self.maximum - self.minimum)

    def inverse_transform(self, values: np.ndarray | float) -> np.ndarray | float:
        return values * (self.maximum - self.minimum) + self.minimum


@dataclass(frozen=True)
class RawSeries:
    """One evenly spaced multivariate series.

    ``values`` has shape (T, J) with columns described by ``feature_specs``.
    Immutable after construction; the value matrix is marked read-only.
    """

    series_id: str
    timestamps: tuple[datetime, ...]
    values: np.ndarray
    granularity: Granularity
    feature_specs: tuple[FeatureSpec, ...] = field(default=())

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "feature_specs", tuple(self.feature_specs))
        if values.ndim != 2:
            raise ShapeMismatchError(f"series values must be (T, J), got ndim={values.ndim}")
        if len(self.timestamps) != values.shape[0]:
            raise ShapeMismatchError(
                f"series {self.series_id!r}: {len(self.timestamps)} timestamps for {values.shape[0]} rows"
            )
        if self.feature_specs:
            validate_feature_specs(self.feature_specs)
            if len(self.feature_specs) != values.shape[1]:
                raise ShapeMismatchError(
                    f"series {self.series_id!r}: {len(self.feature_specs)} specs for {values.shape[1]} columns"
                )
        _check_spacing(self.series_id, self.timestamps, self.granularity)
        values.setflags(write=False)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def target_index(self) -> int:
        for idx, spec in enumerate(self.feature_specs):
            if spec.is_target:
                return idx
        raise ValueError(f"series {self.series_id!r} has no target feature spec")

    def with_values(self, values: np.ndarray, feature_specs: tuple[FeatureSpec, ...] | None = None) -> "RawSeries":
        """Copy of this series with a new value matrix (and optionally new specs)."""
        return RawSeries(
            series_id=self.series_id,
            timestamps=self.timestamps,
            values=values,
            granularity=self.granularity,
            feature_specs=self.feature_specs if feature_specs is None else feature_specs,
        )


def _check_spacing(series_id: str, timestamps: tuple[datetime, ...], granularity: str) -> None:
    if granularity not in GRANULARITY_STEP:
        raise ValueError(f"unknown granularity {granularity!r}")
    step = GRANULARITY_STEP[granularity]
    for i in range(1, len(timestamps)):
        delta = timestamps[i] - timestamps[i - 1]
        if delta <= timedelta(0):
            raise NonMonotonicTimestampsError(
                f"series {series_id!r}: timestamp {timestamps[i].isoformat()} at row {i} "
                f"does not increase past {timestamps[i - 1].isoformat()}"
            )
        if delta != step:
            raise NonMonotonicTimestampsError(
                f"series {series_id!r}: gap of {delta} before row {i} "
                f"({timestamps[i].isoformat()}) is not one {granularity} step"
            )
