"""Name-based explainer dispatch with keyed random streams.

The harness configures explainers by name; every invocation derives a private
stream from (master seed, series id, window anchor, horizon, method), so
explanations are reproducible regardless of evaluation order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tsxfidel._rng import keyed_rng
from tsxfidel.dataset.pool import AblationPool
from tsxfidel.dataset.windows import WindowInstance
from tsxfidel.explainers.base import ImportanceMatrix, ReplacementScheme, explain_omission, explain_random
from tsxfidel.explainers.shap import exact_shapley, explain_kernel_shap
from tsxfidel.models.base import ForecastModel

EXPLAINER_NAMES = ("random", "omission-local", "omission-global", "kernel-shap", "exact-shapley")


@dataclass(frozen=True)
class ExplainerSpec:
    """A named explainer plus its sampling budget (used by SHAP variants)."""

    name: str
    n_coalitions: int = 2048
    n_background: int = 16

    def __post_init__(self) -> None:
        if self.name not in EXPLAINER_NAMES:
            raise ValueError(f"unknown explainer {self.name!r}; expected one of {EXPLAINER_NAMES}")


def compute_importance(
    spec: ExplainerSpec,
    model: ForecastModel,
    window: WindowInstance,
    horizon: int,
    pool: AblationPool,
    global_means: np.ndarray | None,
    master_seed: int,
) -> ImportanceMatrix:
    """Run the named explainer on one window and horizon."""
    rng = keyed_rng(master_seed, window.series_id, window.t_anchor, horizon, spec.name)
    if spec.name == "random":
        return explain_random(window.x, horizon, rng)
    if spec.name == "omission-local":
        return explain_omission(model, window.x, horizon, ReplacementScheme.LOCAL_MEAN)
    if spec.name == "omission-global":
        return explain_omission(model, window.x, horizon, ReplacementScheme.GLOBAL_MEAN, global_means)
    if spec.name == "kernel-shap":
        p = window.x.size
        n_coalitions = max(min(2**p, spec.n_coalitions), p + 2)
        return explain_kernel_shap(
            model, window.x, horizon, pool,
            n_coalitions=n_coalitions, n_background=spec.n_background, seed=rng,
        )
    if spec.name == "exact-shapley":
        return exact_shapley(model, window.x, horizon, pool, n_background=spec.n_background, seed=rng)
    raise ValueError(f"unknown explainer {spec.name!r}")
