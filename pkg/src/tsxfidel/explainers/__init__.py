"""Per-cell attribution explainers and cell rankings."""

from tsxfidel.explainers.base import (
    Direction,
    ImportanceMatrix,
    Ranking,
    ReplacementScheme,
    explain_omission,
    explain_random,
    global_mean,
    local_mean,
    rank_cells,
    training_feature_means,
)
from tsxfidel.explainers.dispatch import EXPLAINER_NAMES, ExplainerSpec, compute_importance
from tsxfidel.explainers.shap import exact_shapley, explain_kernel_shap

__all__ = [
    "Direction",
    "EXPLAINER_NAMES",
    "ExplainerSpec",
    "ImportanceMatrix",
    "Ranking",
    "ReplacementScheme",
    "compute_importance",
    "exact_shapley",
    "explain_kernel_shap",
    "explain_omission",
    "explain_random",
    "global_mean",
    "local_mean",
    "rank_cells",
    "training_feature_means",
]
