"""Gaussian-kernel SVDD with unsupervised mean/median bandwidth selection."""

__version__ = "0.1.0"

from .bandwidth import (
    mean_criterion,
    mean_sq_pairwise_closed_form,
    median2_criterion,
    median_criterion,
    pairwise_stats,
    select_bandwidth,
    weighted_mean_criterion,
)
from .core import (
    DEFAULT_DELTA,
    BandwidthConfig,
    Dataset,
    ScoreReport,
    SvddModel,
    TrainConfig,
    validate_dataset,
)
from .evaluation import bandwidth_grid_search, evaluate_model, f1_score
from .scoring import GridSpec, classify, distance2, score_grid
from .solver import kernel_matrix, solve_dual, train

__all__ = [
    "DEFAULT_DELTA",
    "BandwidthConfig",
    "Dataset",
    "GridSpec",
    "ScoreReport",
    "SvddModel",
    "TrainConfig",
    "bandwidth_grid_search",
    "classify",
    "distance2",
    "evaluate_model",
    "f1_score",
    "kernel_matrix",
    "mean_criterion",
    "mean_sq_pairwise_closed_form",
    "median2_criterion",
    "median_criterion",
    "pairwise_stats",
    "score_grid",
    "select_bandwidth",
    "solve_dual",
    "train",
    "validate_dataset",
    "weighted_mean_criterion",
]
