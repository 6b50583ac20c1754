"""Built-in multi-horizon forecasters and performance scores."""

from tsxfidel.models.base import ForecastModel
from tsxfidel.models.gbr import GradientBoostedForecaster, fit_gbr
from tsxfidel.models.scores import nd, nrmse
from tsxfidel.models.store import load_model, save_model
from tsxfidel.models.tdnn import TimeDelayForecaster, fit_tdnn
from tsxfidel.models.tree import RegressionTree, fit_tree, friedman_improvement

__all__ = [
    "ForecastModel",
    "GradientBoostedForecaster",
    "RegressionTree",
    "TimeDelayForecaster",
    "fit_gbr",
    "fit_tdnn",
    "fit_tree",
    "friedman_improvement",
    "load_model",
    "nd",
    "nrmse",
    "save_model",
]
