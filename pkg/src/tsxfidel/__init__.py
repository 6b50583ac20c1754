"""Local-fidelity evaluation of explanations for time-series forecasters.

End-to-end pipeline: frame raw multivariate series into sliding windows, fit
multi-horizon forecasters, attribute their predictions to window cells with
several explainers, and score those attributions with ablation-based fidelity
metrics (AOPCR and APT) under Monte-Carlo sampling with confidence-interval
early stopping.
"""

__version__ = "0.1.0"

from tsxfidel.dataset import (
    AblationPool,
    FeatureSpec,
    FramedDataset,
    MinMaxScaler,
    RawSeries,
    SyntheticConfig,
    WindowInstance,
    build_framed_dataset,
    build_pool,
    frame_windows,
    generate_time_covariates,
    load_csv,
    make_synthetic,
    normalize_target,
    sample_series,
    split_train_test,
    windows_to_arrays,
)
from tsxfidel.explainers import (
    Direction,
    ExplainerSpec,
    ImportanceMatrix,
    Ranking,
    ReplacementScheme,
    compute_importance,
    exact_shapley,
    explain_kernel_shap,
    explain_omission,
    explain_random,
    rank_cells,
)
from tsxfidel.metrics import (
    EvalConfig,
    FidelityScore,
    MCConfig,
    MCEstimate,
    ablate,
    aopcr_tau,
    aopcr_total,
    apt_tau,
    apt_total,
    evaluate_dataset,
    mc_run,
)
from tsxfidel.models import (
    ForecastModel,
    GradientBoostedForecaster,
    TimeDelayForecaster,
    fit_gbr,
    fit_tdnn,
    fit_tree,
    load_model,
    nd,
    nrmse,
    save_model,
)

__all__ = [
    "AblationPool",
    "Direction",
    "EvalConfig",
    "ExplainerSpec",
    "FeatureSpec",
    "FidelityScore",
    "ForecastModel",
    "FramedDataset",
    "GradientBoostedForecaster",
    "ImportanceMatrix",
    "MCConfig",
    "MCEstimate",
    "MinMaxScaler",
    "RawSeries",
    "Ranking",
    "ReplacementScheme",
    "SyntheticConfig",
    "TimeDelayForecaster",
    "WindowInstance",
    "ablate",
    "aopcr_tau",
    "aopcr_total",
    "apt_tau",
    "apt_total",
    "build_framed_dataset",
    "build_pool",
    "compute_importance",
    "evaluate_dataset",
    "exact_shapley",
    "explain_kernel_shap",
    "explain_omission",
    "explain_random",
    "fit_gbr",
    "fit_tdnn",
    "fit_tree",
    "frame_windows",
    "generate_time_covariates",
    "load_csv",
    "load_model",
    "make_synthetic",
    "mc_run",
    "nd",
    "normalize_target",
    "nrmse",
    "rank_cells",
    "sample_series",
    "save_model",
    "split_train_test",
    "windows_to_arrays",
]
