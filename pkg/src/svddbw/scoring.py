"""Scoring new observations against a trained description."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, ScoreReport, SvddModel
from .errors import ConfigError, DimensionMismatch, NotTwoDimensional
from .solver import sv_distance2

DEFAULT_RESOLUTION = 200
_CHUNK = 8192


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigError(f"grid bounds are empty: {self}")
        if self.resolution < 2:
            raise ConfigError("grid resolution must be at least 2")

    @classmethod
    def around(cls, lower, upper, resolution: int = DEFAULT_RESOLUTION, margin: float = 0.1):
        """Bounding box of [lower, upper] expanded by ``margin`` of its extent per side.

        A zero-width axis borrows the margin of the wider axis (or 1.0 when
        both collapse) so the grid stays two-dimensional.
        """
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        ext = upper - lower
        fallback = ext.max() if ext.max() > 0 else 1.0 / margin
        ext = np.where(ext > 0, ext, fallback)
        pad = margin * ext
        return cls(
            float(lower[0] - pad[0]),
            float(upper[0] + pad[0]),
            float(lower[1] - pad[1]),
            float(upper[1] + pad[1]),
            resolution,
        )

    @classmethod
    def for_model(cls, model: SvddModel, resolution: int = DEFAULT_RESOLUTION):
        lo = model.data_lower if model.data_lower is not None else model.support_vectors.min(axis=0)
        hi = model.data_upper if model.data_upper is not None else model.support_vectors.max(axis=0)
        return cls.around(lo, hi, resolution)

    def centers(self) -> np.ndarray:
        """Cell centres, y outer and x inner, both ascending; shape (res^2, 2)."""
        r = self.resolution
        xs = self.x_min + (np.arange(r) + 0.5) * ((self.x_max - self.x_min) / r)
        ys = self.y_min + (np.arange(r) + 0.5) * ((self.y_max - self.y_min) / r)
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True, eq=False)
class GridScore:
    x: np.ndarray
    y: np.ndarray
    dist2: np.ndarray
    inlier: np.ndarray

    def __len__(self):
        return self.x.shape[0]


def _batch(model: SvddModel, batch) -> np.ndarray:
    z = batch.rows if isinstance(batch, Dataset) else np.asarray(batch, dtype=float)
    if z.ndim == 1:
        z = z.reshape(1, -1) if z.size else z.reshape(0, model.p)
    if z.shape[0] and z.shape[1] != model.p:
        raise DimensionMismatch(f"model expects {model.p} columns, got {z.shape[1]}")
    return z


def distance2_many(model: SvddModel, batch) -> np.ndarray:
    z = _batch(model, batch)
    if z.shape[0] == 0:
        return np.empty(0)
    out = np.empty(z.shape[0])
    for lo in range(0, z.shape[0], _CHUNK):
        out[lo : lo + _CHUNK] = sv_distance2(
            model.support_vectors, model.alphas, model.bandwidth, model.sv_self_term, z[lo : lo + _CHUNK]
        )
    return out


def distance2(model: SvddModel, z) -> float:
    """Squared kernel-space distance from a single point to the centre."""
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != model.p:
        raise DimensionMismatch(f"model expects {model.p} coordinates, got {z.shape[0]}")
    return float(distance2_many(model, z.reshape(1, -1))[0])


def classify(model: SvddModel, batch) -> ScoreReport:
    """Score a batch; outliers are strictly beyond the threshold, ties are inliers."""
    d2 = distance2_many(model, batch)
    return ScoreReport(dist2=d2, is_outlier=d2 > model.threshold, threshold=model.threshold)


def score_grid(model: SvddModel, spec: GridSpec | None = None) -> GridScore:
    if model.p != 2:
        raise NotTwoDimensional(f"grid scoring needs a 2-D model, got p={model.p}")
    spec = spec or GridSpec.for_model(model)
    pts = spec.centers()
    rep = classify(model, pts)
    return GridScore(x=pts[:, 0], y=pts[:, 1], dist2=rep.dist2, inlier=~rep.is_outlier)
