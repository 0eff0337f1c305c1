"""Dual SVDD training with the Gaussian kernel.

Because K(x, x) = 1 and the alphas sum to one, maximising the dual
objective sum_i alpha_i K_ii - alpha^T K alpha is the same as minimising
alpha^T K alpha over the capped simplex {sum alpha = 1, 0 <= alpha <= C}.
We solve that with pairwise (SMO-style) coordinate descent, which keeps
every iterate exactly feasible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .bandwidth import select_bandwidth
from .core import BOUNDARY, INSIDE, OUTSIDE, Dataset, SvddModel, TrainConfig, validate_dataset
from .errors import BadBandwidth, DimensionMismatch, Infeasible, NoBoundarySV, SvddError

MAX_DENSE_N = 20000
_ETA_FLOOR = 1e-12


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class DualSolution:
    alphas: np.ndarray
    objective: float
    iterations: int
    converged: bool
    kkt_violation: float


def gaussian_kernel(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    """exp(-||a_i - b_j||^2 / (2 s^2)) for all row pairs."""
    _check_bandwidth(s)
    return np.exp(-cdist(a, b, "sqeuclidean") / (2.0 * s * s))


def _check_bandwidth(s):
    if not (isinstance(s, (int, float, np.floating)) and math.isfinite(s) and s > 0):
        raise BadBandwidth(f"bandwidth must be positive and finite, got {s!r}")


def kernel_matrix(data, s: float) -> np.ndarray:
    x = data.rows if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, dtype=float))
    _check_bandwidth(s)
    if x.shape[0] > MAX_DENSE_N:
        raise SvddError(
            f"{x.shape[0]} rows exceed the dense kernel limit of {MAX_DENSE_N}; subsample first"
        )
    K = gaussian_kernel(x, x, s)
    np.fill_diagonal(K, 1.0)
    return K


def kkt_violation(K: np.ndarray, alpha: np.ndarray, upper) -> float:
    """max G_j over {alpha_j > 0} minus min G_i over {alpha_i < C}, G = K alpha."""
    upper = np.broadcast_to(np.asarray(upper, dtype=float), alpha.shape)
    g = K @ alpha
    up = alpha < upper
    low = alpha > 0
    if not up.any() or not low.any():
        return 0.0
    return max(0.0, float(g[low].max() - g[up].min()))


def solve_dual(K: np.ndarray, C, tol: float = 1e-6, max_iter: int | None = None) -> DualSolution:
    """Minimise alpha^T K alpha subject to sum alpha = 1 and 0 <= alpha <= C.

    ``C`` may be a scalar or one upper bound per row. Each step moves mass
    from j to i, solving the one-dimensional quadratic exactly and clipping
    to the box. i has the smallest gradient among rows that can grow; j is
    the shrinkable row whose exact step would lower the objective most
    (second-order selection). Stops when the maximal pairwise KKT gap falls
    to ``tol``; running out of iterations is reported through ``converged``
    rather than raised.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if K.shape != (n, n):
        raise DimensionMismatch(f"kernel matrix must be square, got {K.shape}")
    upper = np.array(np.broadcast_to(np.asarray(C, dtype=float), (n,)))
    if np.any(upper <= 0):
        raise Infeasible("upper bounds must be positive")
    if upper.sum() < 1.0 - 1e-12:
        raise Infeasible(f"sum of upper bounds {upper.sum():.6g} < 1: no feasible alpha")
    if max_iter is None:
        max_iter = 100 * n

    alpha = np.minimum(upper / upper.sum(), upper)
    g = K @ alpha
    diag = np.diagonal(K).copy()
    inf = np.inf
    it = 0
    converged = False
    while True:
        up = alpha < upper
        low = alpha > 0
        i = int(np.argmin(np.where(up, g, inf)))
        j = int(np.argmax(np.where(low, g, -inf)))
        gap = g[j] - g[i]
        if not (up[i] and low[j]) or gap <= tol:
            converged = True
            break
        if it >= max_iter:
            break
        it += 1
        # second-order choice of the partner: largest exact decrease b^2 / eta
        b = g - g[i]
        eta_all = np.maximum(diag[i] + diag - 2.0 * K[i], _ETA_FLOOR)
        j = int(np.argmax(np.where(low & (b > 0), b * b / eta_all, -inf)))
        gap = b[j]
        room = min(upper[i] - alpha[i], alpha[j])
        eta = diag[i] + diag[j] - 2.0 * K[i, j]
        t = room if eta < _ETA_FLOOR else min(gap / eta, room)
        if t == alpha[j]:
            alpha[i] += t
            alpha[j] = 0.0
        elif t == upper[i] - alpha[i]:
            alpha[j] -= t
            alpha[i] = upper[i]
        else:
            alpha[i] += t
            alpha[j] -= t
        g += t * (K[i] - K[j])
        if it % 5000 == 0:
            g = K @ alpha

    viol = kkt_violation(K, alpha, upper)
    quad = float(alpha @ K @ alpha)
    return DualSolution(
        alphas=alpha,
        objective=float(alpha @ diag) - quad,
        iterations=it,
        converged=converged and viol <= tol,
        kkt_violation=viol,
    )


def sv_distance2(
    support_vectors: np.ndarray, alphas: np.ndarray, s: float, self_term: float, z: np.ndarray
) -> np.ndarray:
    """1 - 2 sum_i alpha_i K(x_i, z) + self_term, clamped at zero."""
    k = gaussian_kernel(z, support_vectors, s)
    return np.maximum(1.0 - 2.0 * (k @ alphas) + self_term, 0.0)


def train(data: Dataset, config: TrainConfig) -> SvddModel:
    """Fit an SVDD description of ``data``.

    Repeat counts, when present, are honoured exactly: row i gets the upper
    bound w_i * C with C = 1 / (W f), which is the dual of training on the
    expanded dataset after merging the alphas of identical copies.
    """
    data = validate_dataset(data)
    x = data.rows
    n = data.n
    tol = config.kkt_tolerance
    bw = config.bandwidth
    s = select_bandwidth(data, bw)
    C = 1.0 / (data.total_weight * config.outlier_fraction)
    upper = C if data.weights is None else C * data.weights
    upper_arr = np.broadcast_to(np.asarray(upper, dtype=float), (n,))

    K = kernel_matrix(x, s)
    sol = solve_dual(K, upper, tol, config.max_iterations or 100 * n)
    if not sol.converged:
        warnings.warn(
            f"dual solver stopped after {sol.iterations} iterations with KKT gap "
            f"{sol.kkt_violation:.3g} > {tol:g}",
            ConvergenceWarning,
            stacklevel=2,
        )

    alpha = sol.alphas
    is_sv = alpha > tol
    outside = alpha > upper_arr - tol
    tags = np.full(n, INSIDE, dtype="<U8")
    tags[is_sv] = BOUNDARY
    tags[is_sv & outside] = OUTSIDE

    sv_idx = np.flatnonzero(is_sv)
    sv = x[sv_idx]
    a = alpha[sv_idx]
    self_term = float(a @ K[np.ix_(sv_idx, sv_idx)] @ a)

    boundary = tags == BOUNDARY
    if boundary.any():
        r2 = float(np.mean(sv_distance2(sv, a, s, self_term, x[boundary])))
    else:
        candidates = tags != OUTSIDE
        if not candidates.any():
            raise NoBoundarySV(
                "every alpha sits at its upper bound; no point defines the threshold"
            )
        r2 = float(np.max(sv_distance2(sv, a, s, self_term, x[candidates])))

    return SvddModel(
        support_vectors=sv,
        alphas=a,
        bandwidth=float(s),
        penalty=C,
        threshold=max(r2, 0.0),
        sv_self_term=self_term,
        position_tags=tags,
        support_index=sv_idx,
        criterion=bw.criterion,
        delta=bw.delta,
        outlier_fraction=config.outlier_fraction,
        n_train=n,
        converged=sol.converged,
        kkt_violation=sol.kkt_violation,
        iterations=sol.iterations,
        data_lower=x.min(axis=0),
        data_upper=x.max(axis=0),
    )
