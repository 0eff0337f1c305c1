"""Shared domain types: datasets, configurations, trained models, score reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    BadWeights,
    ConfigError,
    EmptyData,
    MissingLabels,
    NonFinite,
    RaggedRows,
)

DEFAULT_DELTA = math.sqrt(2.0) * 1e-6
DEFAULT_KKT_TOLERANCE = 1e-6
CRITERIA = ("mean", "median", "median2", "fixed")

INSIDE, BOUNDARY, OUTSIDE = "inside", "boundary", "outside"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """N observations in p dimensions, with optional repeat counts and labels.

    ``weights`` are positive integer repeat counts. ``labels`` mark ground
    truth for evaluation only: 1 for a member of the described class
    (inlier), 0 for an outlier.
    """

    rows: np.ndarray
    weights: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float, copy=True)
        if rows.ndim == 1:
            rows = rows.reshape(-1, 1)
        object.__setattr__(self, "rows", _frozen(rows))
        if self.weights is not None:
            object.__setattr__(self, "weights", _frozen(np.array(self.weights, dtype=float)))
        if self.labels is not None:
            object.__setattr__(self, "labels", _frozen(np.array(self.labels, dtype=np.int8)))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.n if self.weights is None else self.weights.sum())

    def require_labels(self) -> np.ndarray:
        if self.labels is None:
            raise MissingLabels("dataset has no label column")
        return self.labels


def validate_dataset(
    raw: Union[Dataset, Sequence[Sequence[float]], np.ndarray],
    weights=None,
    labels=None,
) -> Dataset:
    """Check every Dataset invariant and return the (unchanged) dataset.

    ``raw`` may be a Dataset or a nested sequence of rows; in the latter case
    ``weights`` and ``labels`` may be passed alongside.
    """
    if isinstance(raw, Dataset):
        data = raw
    else:
        if not isinstance(raw, np.ndarray):
            raw = list(raw)
            lengths = {len(r) for r in raw}
            if len(lengths) > 1:
                raise RaggedRows(f"rows have unequal lengths {sorted(lengths)}")
        data = Dataset(raw, weights=weights, labels=labels)

    if data.n == 0:
        raise EmptyData("dataset has no rows")
    if data.p == 0:
        raise EmptyData("dataset has no columns")
    finite = np.isfinite(data.rows).all(axis=1)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise NonFinite(f"row {bad} contains a non-finite value")
    if data.weights is not None:
        w = data.weights
        if w.shape != (data.n,):
            raise BadWeights(f"expected {data.n} weights, got shape {w.shape}")
        bad = ~np.isfinite(w) | (w < 1) | (w != np.round(w))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise BadWeights(f"weight at row {i} is {w[i]!r}; weights must be integers >= 1")
    if data.labels is not None:
        if data.labels.shape != (data.n,):
            raise MissingLabels(f"expected {data.n} labels, got shape {data.labels.shape}")
        if not np.isin(data.labels, (0, 1)).all():
            raise ConfigError("labels must be 0 (outlier) or 1 (inlier)")
    return data


@dataclass(frozen=True)
class BandwidthConfig:
    """How to choose the Gaussian bandwidth.

    ``median_sample_size`` of None lets the median criteria decide: exact
    over all pairs up to 2000 rows, a seeded 2000-row subsample above that,
    unless ``exact_median`` forces the full computation.
    """

    criterion: str = "mean"
    delta: float = DEFAULT_DELTA
    fixed_value: Optional[float] = None
    median_sample_size: Optional[int] = None
    seed: Optional[int] = None
    exact_median: bool = False

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ConfigError(f"unknown criterion {self.criterion!r}; expected one of {CRITERIA}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.criterion == "fixed":
            if self.fixed_value is None or not (self.fixed_value > 0 and math.isfinite(self.fixed_value)):
                raise ConfigError("criterion 'fixed' needs a positive finite fixed_value")
        if self.median_sample_size is not None and self.median_sample_size < 2:
            raise ConfigError("median_sample_size must be at least 2")


@dataclass(frozen=True)
class TrainConfig:
    outlier_fraction: float
    kkt_tolerance: float = DEFAULT_KKT_TOLERANCE
    max_iterations: Optional[int] = None  # None means 100 * N
    bandwidth: BandwidthConfig = field(default_factory=BandwidthConfig)

    def __post_init__(self):
        f = self.outlier_fraction
        if not (0.0 < f <= 1.0):
            raise ConfigError(f"outlier fraction must lie in (0, 1], got {f}")
        if not (self.kkt_tolerance > 0):
            raise ConfigError("kkt_tolerance must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ConfigError("max_iterations must be positive")


@dataclass(frozen=True, eq=False)
class SvddModel:
    """A trained Gaussian-kernel data description.

    Only rows with alpha above the KKT tolerance are kept as support vectors.
    ``sv_self_term`` caches sum_ij alpha_i alpha_j K(x_i, x_j) so scoring is
    O(#SV) per point. ``position_tags`` and ``support_index`` refer to the
    training rows and are empty for models loaded from disk.
    """

    support_vectors: np.ndarray
    alphas: np.ndarray
    bandwidth: float
    penalty: float
    threshold: float
    sv_self_term: float
    position_tags: np.ndarray = field(default_factory=lambda: np.empty(0, dtype="<U8"))
    support_index: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    criterion: str = "fixed"
    delta: float = DEFAULT_DELTA
    outlier_fraction: float = float("nan")
    n_train: int = 0
    converged: bool = True
    kkt_violation: float = 0.0
    iterations: int = 0
    data_lower: Optional[np.ndarray] = None
    data_upper: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("support_vectors", "alphas", "position_tags", "support_index"):
            object.__setattr__(self, name, _frozen(np.array(getattr(self, name))))

    @property
    def p(self) -> int:
        return self.support_vectors.shape[1]

    @property
    def n_support(self) -> int:
        return self.alphas.shape[0]

    def count(self, tag: str) -> int:
        return int(np.count_nonzero(self.position_tags == tag))


@dataclass(frozen=True, eq=False)
class ScoreReport:
    dist2: np.ndarray
    is_outlier: np.ndarray
    threshold: float

    def __len__(self):
        return self.dist2.shape[0]
