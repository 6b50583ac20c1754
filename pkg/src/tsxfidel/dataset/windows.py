"""Sliding-window framing and chronological train/test splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tsxfidel.dataset.schema import RawSeries
from tsxfidel.errors import EmptySplitError, SeriesTooShortError, ShapeMismatchError


@dataclass(frozen=True)
class WindowInstance:
    """One model input window plus its forecast targets.

    ``x`` has shape (J, L) with column l holding the time slice at
    ``t_anchor - (L - 1 - l)``; ``y`` holds the next ``t0`` target values.
    """

    x: np.ndarray
    y: np.ndarray
    t_anchor: int
    series_id: str

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 2 or y.ndim != 1:
            raise ShapeMismatchError("window x must be (J, L) and y must be (t0,)")
        if x.shape[1] < 1 or y.shape[0] < 1:
            raise ShapeMismatchError("window needs L >= 1 and t0 >= 1")
        x.setflags(write=False)
        y.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.x.shape

    @property
    def horizons(self) -> int:
        return self.y.shape[0]


def frame_windows(series: RawSeries, window_len: int, horizons: int) -> list[WindowInstance]:
    """Frame a series into stride-1 sliding windows.

    Window k covers input times [k, k+L) and, for the target feature only,
    forecast times [k+L, k+L+t0). Returns T - L - t0 + 1 windows.
    """
    if window_len < 1 or horizons < 1:
        raise ValueError("window_len and horizons must be positive")
    T = series.length
    if T < window_len + horizons:
        raise SeriesTooShortError(
            f"series {series.series_id!r}: length {T} < window {window_len} + horizons {horizons}"
        )
    target = series.target_index
    values = series.values
    windows = []
    for k in range(T - window_len - horizons + 1):
        windows.append(
            WindowInstance(
                x=values[k : k + window_len].T.copy(),
                y=values[k + window_len : k + window_len + horizons, target].copy(),
                t_anchor=k + window_len - 1,
                series_id=series.series_id,
            )
        )
    return windows


def split_train_test(
    windows: list[WindowInstance], ratio: float = 0.8
) -> tuple[list[WindowInstance], list[WindowInstance]]:
    """Chronological split: first floor(ratio * N) windows train, rest test."""
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    n_train = math.floor(ratio * len(windows))
    if n_train == 0 or n_train == len(windows):
        raise EmptySplitError(f"{len(windows)} windows at ratio {ratio} leaves an empty split")
    return windows[:n_train], windows[n_train:]


def windows_to_arrays(windows: list[WindowInstance]) -> tuple[np.ndarray, np.ndarray]:
    """Stack windows into (N, J, L) inputs and (N, t0) targets."""
    if not windows:
        raise ValueError("no windows to stack")
    X = np.stack([w.x for w in windows])
    Y = np.stack([w.y for w in windows])
    return X, Y
