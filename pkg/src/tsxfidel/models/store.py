"""Model persistence: a versioned npz container with a JSON header.

Round trips are exact; a loaded model predicts bit-identically to the one
saved.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from tsxfidel.models.base import ForecastModel
from tsxfidel.models.gbr import GradientBoostedForecaster
from tsxfidel.models.tdnn import TimeDelayForecaster
from tsxfidel.models.tree import RegressionTree

FORMAT_NAME = "tsxfidel-model"
FORMAT_VERSION = 1


def save_model(model: ForecastModel, path: str | Path) -> None:
    path = Path(path)
    if isinstance(model, GradientBoostedForecaster):
        kind, arrays = "gbr", _pack_gbr(model)
    elif isinstance(model, TimeDelayForecaster):
        kind, arrays = "tdnn", {key: value for key, value in model.weights_.items()}
    else:
        raise TypeError(f"cannot serialize model of type {type(model).__name__}")
    header = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": kind,
        "params": model.get_params(),
        "window_shape": list(model.window_shape),
        "n_horizons": model.n_horizons,
    }
    with path.open("wb") as fh:
        np.savez(fh, header=np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8), **arrays)


def load_model(path: str | Path) -> ForecastModel:
    path = Path(path)
    with np.load(path) as data:
        header = json.loads(bytes(data["header"]).decode())
        if header.get("format") != FORMAT_NAME or header.get("version") != FORMAT_VERSION:
            raise ValueError(f"{path}: not a {FORMAT_NAME} v{FORMAT_VERSION} file")
        arrays = {key: data[key] for key in data.files if key != "header"}

    window_shape = tuple(header["window_shape"])
    n_horizons = int(header["n_horizons"])
    if header["kind"] == "gbr":
        model = GradientBoostedForecaster(**header["params"])
        model.window_shape_ = window_shape
        model.n_horizons_ = n_horizons
        model.intercepts_ = arrays["intercepts"]
        model.trees_ = _unpack_gbr_trees(arrays, n_horizons, model.max_depth)
        return model
    if header["kind"] == "tdnn":
        model = TimeDelayForecaster(**header["params"])
        model.window_shape_ = window_shape
        model.n_horizons_ = n_horizons
        model.weights_ = {key: arrays[key] for key in ("w1", "b1", "w2", "b2", "w3", "b3")}
        return model
    raise ValueError(f"{path}: unknown model kind {header['kind']!r}")


def _pack_gbr(model: GradientBoostedForecaster) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {"intercepts": model.intercepts_}
    for tau, trees in enumerate(model.trees_):
        sizes = np.asarray([t.n_nodes for t in trees], dtype=np.intp)
        arrays[f"h{tau}_sizes"] = sizes
        arrays[f"h{tau}_feature"] = np.concatenate([t.feature for t in trees])
        arrays[f"h{tau}_threshold"] = np.concatenate([t.threshold for t in trees])
        arrays[f"h{tau}_left"] = np.concatenate([t.left for t in trees])
        arrays[f"h{tau}_right"] = np.concatenate([t.right for t in trees])
        arrays[f"h{tau}_value"] = np.concatenate([t.value for t in trees])
    return arrays


def _unpack_gbr_trees(arrays: dict[str, np.ndarray], n_horizons: int, max_depth: int) -> list[list[RegressionTree]]:
    all_trees: list[list[RegressionTree]] = []
    for tau in range(n_horizons):
        offsets = np.concatenate([[0], np.cumsum(arrays[f"h{tau}_sizes"])])
        trees = []
        for i in range(len(offsets) - 1):
            lo, hi = offsets[i], offsets[i + 1]
            trees.append(
                RegressionTree(
                    feature=arrays[f"h{tau}_feature"][lo:hi].astype(np.intp),
                    threshold=arrays[f"h{tau}_threshold"][lo:hi],
                    left=arrays[f"h{tau}_left"][lo:hi].astype(np.intp),
                    right=arrays[f"h{tau}_right"][lo:hi].astype(np.intp),
                    value=arrays[f"h{tau}_value"][lo:hi],
                    max_depth=max_depth,
                )
            )
        all_trees.append(trees)
    return all_trees
