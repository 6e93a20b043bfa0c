"""Lasso estimators in statistical and neural-network form.

The statistical lasso is solved by coordinate descent (``classic``). The
same objective written as a one-layer network with a scale parameter is
trained by Adam with exact zeroing (``network``, ``training``) in three
flavours: standard, restricted and voting. ``datagen``, ``metrics`` and
``harness`` run seeded repeated-validation benchmarks over them.
"""

from .classic import LambdaGrid, cd_linear, cd_logistic, cv_statistical_lasso, lambda_grid, lambda_max
from .data import FittedModel, LabeledDataset, destandardize, make_folds, standardize
from .datagen import SyntheticConfig, simulate
from .harness import ExperimentConfig, load_csv, run_experiment
from .metrics import RunMetrics, evaluate, paired_t_test
from .training import TrainConfig, fit_restricted, fit_standard, fit_voting, refit_unpenalized

__version__ = "0.1.0"

__all__ = [
    "LambdaGrid", "cd_linear", "cd_logistic", "cv_statistical_lasso", "lambda_grid", "lambda_max",
    "FittedModel", "LabeledDataset", "destandardize", "make_folds", "standardize",
    "SyntheticConfig", "simulate", "ExperimentConfig", "load_csv", "run_experiment",
    "RunMetrics", "evaluate", "paired_t_test", "TrainConfig", "fit_restricted", "fit_standard",
    "fit_voting", "refit_unpenalized",
]
