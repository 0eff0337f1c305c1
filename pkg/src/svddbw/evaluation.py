"""F1 evaluation against labels and supervised bandwidth search."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .bandwidth import mean_criterion
from .core import DEFAULT_DELTA, BandwidthConfig, Dataset, SvddModel, TrainConfig
from .errors import AllFailed, ConfigError, DimensionMismatch, SvddError
from .scoring import classify
from .solver import train

log = logging.getLogger(__name__)

POSITIVE_CLASSES = ("inlier", "outlier")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class BandwidthSearchResult:
    grid: list  # (s, f1) pairs in grid order; f1 = -1 marks a failed fit
    best_s: float
    best_f1: float


def f1_score(counts: ConfusionCounts) -> float:
    """2TP / (2TP + FN + FP); 0 when there are no positives anywhere."""
    denom = 2 * counts.tp + counts.fn + counts.fp
    return 0.0 if denom == 0 else 2 * counts.tp / denom


def confusion(predicted_positive: np.ndarray, actual_positive: np.ndarray) -> ConfusionCounts:
    pred = np.asarray(predicted_positive, dtype=bool)
    act = np.asarray(actual_positive, dtype=bool)
    return ConfusionCounts(
        tp=int(np.count_nonzero(pred & act)),
        fp=int(np.count_nonzero(pred & ~act)),
        fn=int(np.count_nonzero(~pred & act)),
        tn=int(np.count_nonzero(~pred & ~act)),
    )


def _positive_masks(is_outlier, labels, positive_class):
    if positive_class not in POSITIVE_CLASSES:
        raise ConfigError(f"positive class must be one of {POSITIVE_CLASSES}")
    inlier_label = np.asarray(labels) == 1
    if positive_class == "inlier":
        return ~is_outlier, inlier_label
    return is_outlier, ~inlier_label


def evaluate_model(model: SvddModel, labeled: Dataset, positive_class: str = "inlier"):
    """Return (ConfusionCounts, F1) of the model's verdicts against the labels."""
    labels = labeled.require_labels()
    if labeled.p != model.p:
        raise DimensionMismatch(f"model expects {model.p} columns, got {labeled.p}")
    rep = classify(model, labeled)
    pred, act = _positive_masks(rep.is_outlier, labels, positive_class)
    counts = confusion(pred, act)
    return counts, f1_score(counts)


def default_bandwidth_grid(data, n: int = 20, delta: float = DEFAULT_DELTA, span: float = 10.0):
    """``n`` log-spaced bandwidths over [s_mean / span, s_mean * span].

    For even ``n`` the mean-criterion value itself is not a grid node, so it
    is inserted; the returned grid is sorted ascending.
    """
    s = mean_criterion(data, delta)
    grid = np.geomspace(s / span, s * span, n)
    if not np.any(grid == s):
        grid = np.sort(np.append(grid, s))
    return [float(v) for v in grid]


def best_of(grid: Sequence[tuple]) -> tuple[float, float]:
    """Argmax over (s, f1) pairs, excluding failures, smallest s on ties."""
    ok = [(s, f) for s, f in grid if f >= 0]
    if not ok:
        raise AllFailed("training failed at every bandwidth")
    best_f1 = max(f for _, f in ok)
    best_s = min(s for s, f in ok if f == best_f1)
    return best_s, best_f1


def bandwidth_grid_search(
    train_data: Dataset,
    eval_data: Dataset,
    s_grid: Sequence[float],
    f: float,
    positive_class: str = "inlier",
    kkt_tolerance: float = 1e-6,
    max_iterations: int | None = None,
) -> BandwidthSearchResult:
    """Train at every bandwidth in ``s_grid`` and score F1 on ``eval_data``."""
    s_grid = [float(s) for s in s_grid]
    if not s_grid or any(not (s > 0) for s in s_grid):
        raise ConfigError("bandwidth grid must be nonempty and positive")
    if train_data.p != eval_data.p:
        raise DimensionMismatch(f"train has {train_data.p} columns, eval has {eval_data.p}")
    eval_data.require_labels()
    base = TrainConfig(outlier_fraction=f, kkt_tolerance=kkt_tolerance, max_iterations=max_iterations)
    trace = []
    for s in s_grid:
        cfg = replace(base, bandwidth=BandwidthConfig(criterion="fixed", fixed_value=s))
        try:
            model = train(train_data, cfg)
        except SvddError as exc:
            log.warning("training failed at s=%g: %s", s, exc)
            trace.append((s, -1.0))
            continue
        trace.append((s, evaluate_model(model, eval_data, positive_class)[1]))
    best_s, best_f1 = best_of(trace)
    return BandwidthSearchResult(grid=trace, best_s=best_s, best_f1=best_f1)
