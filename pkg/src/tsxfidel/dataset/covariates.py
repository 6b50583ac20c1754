"""Calendar covariates generated from series timestamps."""

from __future__ import annotations

from datetime import datetime

import numpy as np

from tsxfidel.dataset.schema import FeatureSpec, RawSeries

HOURLY_COVARIATES = ("hour_of_day", "day_of_week", "week_of_month", "month")
DAILY_COVARIATES = ("week_of_month", "month")


def _calendar_field(ts: datetime, name: str) -> int:
    if name == "hour_of_day":
        return ts.hour
    if name == "day_of_week":
        return ts.weekday()  # Monday = 0
    if name == "week_of_month":
        return (ts.day + 6) // 7  # ceil(day / 7), weeks 1..5
    if name == "month":
        return ts.month
    raise ValueError(f"unknown calendar covariate {name!r}")


def generate_time_covariates(series: RawSeries) -> RawSeries:
    """Append calendar covariates as numeric features.

    Hourly series gain hour-of-day, day-of-week, week-of-month and month;
    daily series gain week-of-month and month. A covariate whose name already
    exists in the schema is treated as raw data and not regenerated.
    """
    names = HOURLY_COVARIATES if series.granularity == "hourly" else DAILY_COVARIATES
    existing = {spec.name for spec in series.feature_specs}
    new_names = [name for name in names if name not in existing]
    if not new_names:
        return series

    columns = np.empty((series.length, len(new_names)), dtype=np.float64)
    for col, name in enumerate(new_names):
        columns[:, col] = [_calendar_field(ts, name) for ts in series.timestamps]

    specs = series.feature_specs + tuple(
        FeatureSpec(name=name, kind="numeric", is_target=False, is_covariate=True) for name in new_names
    )
    values = np.hstack([series.values, columns])
    return series.with_values(values, feature_specs=specs)
