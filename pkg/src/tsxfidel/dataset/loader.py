"""CSV ingestion.

Expected layout: a header row with ``timestamp`` (ISO-8601), ``series_id``
and one column per schema feature. Rows may interleave series; within a
series they are sorted by timestamp and must then be strictly increasing and
evenly spaced at the declared granularity. Missing values are a hard error.
"""

from __future__ import annotations

import csv
from datetime import datetime
from pathlib import Path

import numpy as np

from tsxfidel.dataset.schema import CATEGORICAL, FeatureSpec, Granularity, RawSeries, validate_feature_specs
from tsxfidel.errors import MissingColumnError, NonMonotonicTimestampsError, UnparseableCellError

TIMESTAMP_COLUMN = "timestamp"
SERIES_ID_COLUMN = "series_id"


def load_csv(path: str | Path, schema: list[FeatureSpec], granularity: Granularity) -> list[RawSeries]:
    """Read one RawSeries per distinct series id, rows sorted by timestamp.

    Categorical features are integer-encoded with codes assigned by sorted
    vocabulary order, so encoding is independent of row order.
    """
    path = Path(path)
    specs = tuple(schema)
    validate_feature_specs(specs)

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumnError(f"{path}: file is empty, header row required") from None
        rows = [(line_no, row) for line_no, row in enumerate(reader, start=2)]

    col_index: dict[str, int] = {name: i for i, name in enumerate(header)}
    for required in (TIMESTAMP_COLUMN, SERIES_ID_COLUMN, *(s.name for s in specs)):
        if required not in col_index:
            raise MissingColumnError(f"{path}: required column {required!r} not in header {header}")

    # First pass: group raw cells per series and collect categorical vocabularies.
    categorical_values: dict[str, set[str]] = {s.name: set() for s in specs if s.kind == CATEGORICAL}
    by_series: dict[str, list[tuple[datetime, int, list[str]]]] = {}
    for line_no, row in rows:
        if len(row) != len(header):
            raise UnparseableCellError(f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}")
        stamp_text = row[col_index[TIMESTAMP_COLUMN]]
        try:
            stamp = datetime.fromisoformat(stamp_text)
        except ValueError:
            raise UnparseableCellError(
                f"{path}:{line_no}: column {TIMESTAMP_COLUMN!r}: {stamp_text!r} is not ISO-8601"
            ) from None
        series_id = row[col_index[SERIES_ID_COLUMN]]
        cells = [row[col_index[s.name]] for s in specs]
        for spec, cell in zip(specs, cells):
            if spec.kind == CATEGORICAL:
                categorical_values[spec.name].add(cell)
        by_series.setdefault(series_id, []).append((stamp, line_no, cells))

    codes = {name: {value: float(code) for code, value in enumerate(sorted(values))}
             for name, values in categorical_values.items()}

    series_list: list[RawSeries] = []
    for series_id, entries in by_series.items():
        entries.sort(key=lambda item: item[0])
        for (prev_stamp, _, _), (stamp, line_no, _) in zip(entries, entries[1:]):
            if stamp == prev_stamp:
                raise NonMonotonicTimestampsError(
                    f"{path}:{line_no}: series {series_id!r} repeats timestamp {stamp.isoformat()}"
                )
        values = np.empty((len(entries), len(specs)), dtype=np.float64)
        for r, (_, line_no, cells) in enumerate(entries):
            for c, (spec, cell) in enumerate(zip(specs, cells)):
                values[r, c] = _parse_cell(path, line_no, spec, cell, codes)
        series_list.append(
            RawSeries(
                series_id=series_id,
                timestamps=tuple(stamp for stamp, _, _ in entries),
                values=values,
                granularity=granularity,
                feature_specs=specs,
            )
        )
    return series_list


def _parse_cell(path: Path, line_no: int, spec: FeatureSpec, cell: str, codes: dict[str, dict[str, float]]) -> float:
    if spec.kind == CATEGORICAL:
        return codes[spec.name][cell]
    text = cell.strip()
    if not text:
        raise UnparseableCellError(f"{path}:{line_no}: column {spec.name!r} is empty")
    try:
        value = float(text)
    except ValueError:
        raise UnparseableCellError(
            f"{path}:{line_no}: column {spec.name!r}: {cell!r} is not numeric"
        ) from None
    if not np.isfinite(value):
        raise UnparseableCellError(f"{path}:{line_no}: column {spec.name!r}: {cell!r} is not finite")
    return value
