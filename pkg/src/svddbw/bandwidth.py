"""Unsupervised Gaussian bandwidth selection.

The mean and median criteria pick the bandwidth s so that the kernel
matrix exp(-||x_i - x_j||^2 / (2 s^2)) stays a prescribed Frobenius distance
away from the identity. Both share the denominator ln((N - 1) / delta^2);
they differ only in the central tendency of pairwise distances used in the
numerator. The median2 criterion (median distance / sqrt(2)) is the common
heuristic baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from .core import DEFAULT_DELTA, BandwidthConfig, Dataset
from .errors import ConfigError, DegenerateData, LogDomain, MissingWeights, TooFewPoints

EXACT_MEDIAN_LIMIT = 2000
DEFAULT_MEDIAN_SAMPLE = 2000


@dataclass(frozen=True)
class PairwiseStats:
    mean_sq_dist: float
    median_dist: float
    n_pairs: int


def _rows(data) -> np.ndarray:
    x = data.rows if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.shape[0] < 2:
        raise TooFewPoints(f"need at least 2 points, got {x.shape[0]}")
    return x


def log_term(n: float, delta: float) -> float:
    """ln((n - 1) / delta^2), the shared denominator of the criteria."""
    if not (0.0 < delta < 1.0):
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    ratio = (n - 1) / delta**2
    if ratio <= 1.0:
        raise LogDomain(f"(N-1)/delta^2 = {ratio:g} <= 1; the log term is not positive")
    return math.log(ratio)


def mean_sq_pairwise_closed_form(data) -> float:
    """Mean squared pairwise distance via column variances, O(Np).

    Uses sum_{i<j} ||x_i - x_j||^2 = N^2 * sum_j var_j with population
    variances, hence D^2 = 2N/(N-1) * sum_j var_j.
    """
    x = _rows(data)
    n = x.shape[0]
    total_var = float(np.var(x, axis=0).sum())
    return 2.0 * n / (n - 1) * total_var


def median_pairwise_distance(
    data, sample: Optional[int] = None, seed: Optional[int] = None
) -> float:
    """Median Euclidean distance over all pairs, or over a seeded row subsample."""
    x = _rows(data)
    n = x.shape[0]
    if sample is not None and sample < n:
        if sample < 2:
            raise ConfigError("median sample size must be at least 2")
        rng = np.random.default_rng(seed)
        x = x[rng.choice(n, size=sample, replace=False)]
    return float(np.median(pdist(x)))


def pairwise_stats(data, sample: Optional[int] = None, seed: Optional[int] = None) -> PairwiseStats:
    x = _rows(data)
    n = x.shape[0]
    return PairwiseStats(
        mean_sq_dist=mean_sq_pairwise_closed_form(x),
        median_dist=median_pairwise_distance(x, sample, seed),
        n_pairs=n * (n - 1) // 2,
    )


def _resolve_sample(n: int, sample, exact: bool) -> Optional[int]:
    if sample is not None:
        if not (2 <= sample <= n):
            raise ConfigError(f"median sample size must lie in [2, {n}], got {sample}")
        return None if sample == n else sample
    if exact or n <= EXACT_MEDIAN_LIMIT:
        return None
    return DEFAULT_MEDIAN_SAMPLE


def mean_criterion(data, delta: float = DEFAULT_DELTA) -> float:
    x = _rows(data)
    d2 = mean_sq_pairwise_closed_form(x)
    if d2 <= 0.0:
        raise DegenerateData("all points are identical; mean squared distance is 0")
    return math.sqrt(d2 / log_term(x.shape[0], delta))


def median_criterion(
    data,
    delta: float = DEFAULT_DELTA,
    sample: Optional[int] = None,
    seed: Optional[int] = None,
    exact: bool = False,
) -> float:
    """Median pairwise distance over sqrt(ln((N-1)/delta^2)).

    With subsampling the log term still uses the full N.
    """
    x = _rows(data)
    n = x.shape[0]
    med = median_pairwise_distance(x, _resolve_sample(n, sample, exact), seed)
    if med <= 0.0:
        raise DegenerateData("median pairwise distance is 0")
    return med / math.sqrt(log_term(n, delta))


def median2_criterion(
    data, sample: Optional[int] = None, seed: Optional[int] = None, exact: bool = False
) -> float:
    x = _rows(data)
    med = median_pairwise_distance(x, _resolve_sample(x.shape[0], sample, exact), seed)
    if med <= 0.0:
        raise DegenerateData("median pairwise distance is 0")
    return med / math.sqrt(2.0)


def weighted_mean_criterion(data: Dataset, delta: float = DEFAULT_DELTA) -> float:
    """Mean criterion for rows repeated w_i times.

    With W = sum w, M = sum w^2, Q = (W^2 - M)/2 and weighted column
    variances var_w: s = sqrt(W^2 sum var_w / (Q ln(2Q / (delta^2 M)))).
    """
    if not isinstance(data, Dataset) or data.weights is None:
        raise MissingWeights("weighted mean criterion needs a dataset with weights")
    x = _rows(data)
    w = data.weights.astype(float)
    if not (0.0 < delta < 1.0):
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    W = w.sum()
    M = float(np.dot(w, w))
    Q = (W * W - M) / 2.0
    mu = w @ x / W
    total_var = float(w @ ((x - mu) ** 2).sum(axis=1)) / W
    if Q <= 0.0 or total_var <= 0.0:
        raise DegenerateData("weighted variance is 0; all points are identical")
    ratio = 2.0 * Q / (delta**2 * M)
    if ratio <= 1.0:
        raise LogDomain(f"2Q/(delta^2 M) = {ratio:g} <= 1; the log term is not positive")
    return math.sqrt(W * W * total_var / (Q * math.log(ratio)))


def select_bandwidth(data: Dataset, config: BandwidthConfig) -> float:
    """Resolve a BandwidthConfig against data.

    The mean criterion switches to its weighted form when the dataset
    carries repeat counts.
    """
    c = config.criterion
    if c == "fixed":
        return float(config.fixed_value)
    if c == "mean":
        if isinstance(data, Dataset) and data.weights is not None:
            return weighted_mean_criterion(data, config.delta)
        return mean_criterion(data, config.delta)
    seed = 0 if config.seed is None else config.seed
    if c == "median":
        return median_criterion(
            data, config.delta, config.median_sample_size, seed, config.exact_median
        )
    if c == "median2":
        return median2_criterion(data, config.median_sample_size, seed, config.exact_median)
    raise ConfigError(f"unknown criterion {c!r}")
