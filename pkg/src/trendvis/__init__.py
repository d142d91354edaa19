"""Visibility of algorithmically ranked trending topics.

A topic's visibility at discrimination level ``d`` is the sum of
``rank ** -d`` over the minutes it spent in the ranked list. This package
ingests crawls of such lists, computes visibility, regresses log read
counts on log visibility, and sweeps ``d`` for the best fit.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import TrendvisError
from .model import (
    DEFAULT_R_CAP,
    Dataset,
    Diagnostic,
    RankObservation,
    TopicMeta,
    Trajectory,
    append_observation,
    dwell_time,
    validate_dataset,
)
from .regression import (
    Boundary,
    CategoryAnalysis,
    CategoryReport,
    FitResult,
    SweepResult,
    filter_regression_points,
    ols_loglog,
    per_category_sweep,
    sweep_dmax,
)
from .synth import SynthConfig, generate_dataset, oracle_sweep
from .visibility import (
    ImportanceSeries,
    find_crossover,
    importance_transform,
    make_grid,
    rank1_dwell,
    visibility,
    visibility_profile,
)

__all__ = [
    "BACKEND",
    "Boundary",
    "CategoryAnalysis",
    "CategoryReport",
    "DEFAULT_R_CAP",
    "Dataset",
    "Diagnostic",
    "FitResult",
    "ImportanceSeries",
    "RankObservation",
    "SweepResult",
    "SynthConfig",
    "TopicMeta",
    "Trajectory",
    "TrendvisError",
    "append_observation",
    "dwell_time",
    "filter_regression_points",
    "find_crossover",
    "generate_dataset",
    "importance_transform",
    "make_grid",
    "oracle_sweep",
    "ols_loglog",
    "per_category_sweep",
    "rank1_dwell",
    "sweep_dmax",
    "validate_dataset",
    "visibility",
    "visibility_profile",
]
