"""Confidence-boosted stochastic gradient learners for heavy-tailed data.

Divide-and-conquer SGD with robust merging, SGD sub-processes selected by
robust validation, robust gradient-descent baselines, and a synthetic
benchmark harness with a command-line front end.
"""

from .boosting import (BoostConfig, dc_sgd, k_from_delta, partition_indices, rv_sgd_ave,
                       rv_sgd_cv)
from .estimators import (DCSGDRegressor, ProjectedSGDRegressor, RobustGDRegressor,
                         RVSGDRegressor)
from .harness import ExperimentConfig, preset, run_experiment, summarize
from .merge_rules import (MergeRule, coordinate_median, geometric_median, merge,
                          radius_gamma, smallest_ball)
from .rgd_baselines import BaselineConfig, run_baseline
from .robust_scalar import (RobustLocation, Validator, catoni_mean, median_of_means,
                            truncated_mean, validate)
from .sgd_engine import GradOracle, SquaredLossOracle, StepSchedule, run_sgd
from .synthetic import NoiseModel, QuadraticProblem, make_problem, theory_report
from .vecmath import FeasibleSet, project, quantile, scalar_median

__version__ = "0.1.0"

__all__ = [
    "BaselineConfig", "BoostConfig", "DCSGDRegressor", "ExperimentConfig", "FeasibleSet",
    "GradOracle", "MergeRule", "NoiseModel", "ProjectedSGDRegressor", "QuadraticProblem",
    "RVSGDRegressor", "RobustGDRegressor", "RobustLocation", "SquaredLossOracle",
    "StepSchedule", "Validator", "catoni_mean", "coordinate_median", "dc_sgd",
    "geometric_median", "k_from_delta", "make_problem", "median_of_means", "merge",
    "partition_indices", "preset", "project", "quantile", "radius_gamma", "run_baseline",
    "run_experiment", "run_sgd", "rv_sgd_ave", "rv_sgd_cv", "scalar_median", "smallest_ball",
    "summarize", "theory_report", "truncated_mean", "validate",
]
