"""Synthetic 2-D generators for qualitative and F1 checks."""

from __future__ import annotations

import numpy as np

from .core import Dataset


def banana(n: int, seed: int = 0, noise: float = 0.12) -> Dataset:
    """Points along a thick circular arc spanning 150 degrees."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(np.pi / 12, 11 * np.pi / 12, n)
    r = 2.0 + noise * rng.standard_normal(n)
    return Dataset(np.column_stack([r * np.cos(t), r * np.sin(t)]))


CLUSTER_CENTERS = np.array([[-2.0, 0.0], [2.0, 0.0]])


def two_clusters(n: int, seed: int = 0, scale: float = 0.5, centers=CLUSTER_CENTERS) -> Dataset:
    """Two isotropic Gaussian blobs of equal size."""
    rng = np.random.default_rng(seed)
    which = np.arange(n) % len(centers)
    return Dataset(centers[which] + scale * rng.standard_normal((n, 2)))


def two_cluster_eval(
    n_in: int, n_out: int, seed: int = 0, scale: float = 0.5, exclusion: float = 3.0, centers=CLUSTER_CENTERS
) -> Dataset:
    """Labelled scoring set: fresh cluster draws (label 1) plus background
    points uniform over the padded bounding box, keeping only those more than
    ``exclusion * scale`` from every centre (label 0)."""
    rng = np.random.default_rng([seed, 7])
    inl = two_clusters(n_in, seed + 10_000, scale, centers).rows
    lo = centers.min(axis=0) - 3 * exclusion * scale
    hi = centers.max(axis=0) + 3 * exclusion * scale
    out = np.empty((0, 2))
    while out.shape[0] < n_out:
        cand = rng.uniform(lo, hi, size=(4 * n_out, 2))
        d = np.linalg.norm(cand[:, None, :] - centers[None], axis=2).min(axis=1)
        out = np.vstack([out, cand[d > exclusion * scale]])
    rows = np.vstack([inl, out[:n_out]])
    labels = np.concatenate([np.ones(n_in, dtype=np.int8), np.zeros(n_out, dtype=np.int8)])
    return Dataset(rows, labels=labels)


def far_frame(data, n: int, seed: int = 0, distance: float = 2.0, width: float = 1.0) -> np.ndarray:
    """Uniform points in a square frame at least ``distance`` data diameters
    beyond the data's bounding box, ``width`` diameters thick."""
    x = data.rows if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    lo, hi = x.min(axis=0), x.max(axis=0)
    diam = float(np.linalg.norm(hi - lo))
    inner_lo, inner_hi = lo - distance * diam, hi + distance * diam
    outer_lo, outer_hi = inner_lo - width * diam, inner_hi + width * diam
    rng = np.random.default_rng([seed, 11])
    out = np.empty((0, x.shape[1]))
    while out.shape[0] < n:
        cand = rng.uniform(outer_lo, outer_hi, size=(4 * n, x.shape[1]))
        inside_inner = np.all((cand > inner_lo) & (cand < inner_hi), axis=1)
        out = np.vstack([out, cand[~inside_inner]])
    return out[:n]
