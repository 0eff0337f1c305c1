"""Random star-shaped polygons and the F1-ratio bandwidth study.

Vertices are r_k * (cos t_(k), sin t_(k)) with t_(k) the sorted draws of
iid uniform angles on (0, 2 pi) and r_k iid uniform on [r_min, r_max].
Data are sampled uniformly inside a polygon; the polygon's bounding box is
gridded and labelled inside/outside, which gives an exact F1 for any
trained description. Comparing the F1 at the mean and median criterion
bandwidths with the best F1 over a bandwidth grid yields the ratios.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .bandwidth import mean_criterion, median_criterion
from .core import DEFAULT_DELTA, BandwidthConfig, Dataset, TrainConfig
from .errors import BadParams, SvddError
from .evaluation import best_of, confusion, f1_score
from .scoring import DEFAULT_RESOLUTION, GridSpec, classify
from .solver import train

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.PCG64"
_SAMPLE_STREAM = 1
_EDGE_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class PolygonInstance:
    vertices: np.ndarray  # (n, 2), counterclockwise
    angles: np.ndarray
    radii: np.ndarray
    r_min: float
    r_max: float
    seed: int

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))

    def grid_spec(self, resolution: int = DEFAULT_RESOLUTION) -> GridSpec:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return GridSpec(lo[0], hi[0], lo[1], hi[1], resolution)


def generate_polygon(n_vertices: int, r_min: float = 3.0, r_max: float = 5.0, seed: int = 0) -> PolygonInstance:
    """Draw a random polygon that is star-shaped about the origin.

    Angle draws whose largest circular gap reaches pi are redrawn: such a
    polygon does not contain the origin and may self-intersect.
    """
    if n_vertices < 3:
        raise BadParams(f"a polygon needs at least 3 vertices, got {n_vertices}")
    if not (0 < r_min <= r_max) or not math.isfinite(r_max):
        raise BadParams(f"need 0 < r_min <= r_max, got r_min={r_min}, r_max={r_max}")
    rng = np.random.default_rng(seed)
    while True:
        theta = np.sort(rng.uniform(0.0, 2 * np.pi, n_vertices))
        gaps = np.diff(np.concatenate([theta, [theta[0] + 2 * np.pi]]))
        if theta[0] > 0 and np.all(gaps > 0) and gaps.max() < np.pi:
            break
    r = rng.uniform(r_min, r_max, n_vertices)
    verts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return PolygonInstance(verts, theta, r, float(r_min), float(r_max), int(seed))


def regular_polygon(n_vertices: int, radius: float = 4.0, offset: float = 0.0, seed: int = 0) -> PolygonInstance:
    """Regular polygon with vertex k at angle offset + 2 pi k / n."""
    if n_vertices < 3 or not radius > 0:
        raise BadParams("need n_vertices >= 3 and a positive radius")
    theta = (offset + 2 * np.pi * np.arange(n_vertices) / n_vertices) % (2 * np.pi)
    theta = np.sort(theta)
    r = np.full(n_vertices, float(radius))
    verts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return PolygonInstance(verts, theta, r, float(radius), float(radius), int(seed))


def points_in_polygon(vertices: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Even-odd ray casting, vectorised over points; boundary points count as inside."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    px, py = pts[:, 0:1], pts[:, 1:2]
    a = np.asarray(vertices, dtype=float)
    b = np.roll(a, -1, axis=0)
    ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]

    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
    inside = np.count_nonzero(straddle & (px < x_cross), axis=1) % 2 == 1

    # on-edge test: distance to each segment within tolerance
    ex, ey = bx - ax, by - ay
    len2 = ex * ex + ey * ey
    t = np.clip(((px - ax) * ex + (py - ay) * ey) / len2, 0.0, 1.0)
    dx = px - (ax + t * ex)
    dy = py - (ay + t * ey)
    scale = max(1.0, float(np.abs(a).max()))
    on_edge = np.any(dx * dx + dy * dy <= (_EDGE_EPS * scale) ** 2, axis=1)
    return inside | on_edge


def point_in_polygon(poly: PolygonInstance, z) -> bool:
    return bool(points_in_polygon(poly.vertices, np.asarray(z, dtype=float).reshape(1, 2))[0])


def sample_interior(poly: PolygonInstance, n: int, seed: int) -> Dataset:
    """n iid uniform interior points by rejection from the bounding box."""
    if n < 1:
        raise BadParams("sample size must be positive")
    rng = np.random.default_rng([seed, _SAMPLE_STREAM])
    lo = poly.vertices.min(axis=0)
    hi = poly.vertices.max(axis=0)
    accept = poly.area() / float(np.prod(hi - lo))
    out = []
    have = 0
    while have < n:
        m = int(1.2 * (n - have) / accept) + 16
        cand = rng.uniform(lo, hi, size=(m, 2))
        keep = cand[points_in_polygon(poly.vertices, cand)]
        out.append(keep)
        have += keep.shape[0]
    return Dataset(np.concatenate(out)[:n])


@dataclass(frozen=True, eq=False)
class GridLabels:
    x: np.ndarray
    y: np.ndarray
    inside: np.ndarray

    def __len__(self):
        return self.x.shape[0]


def label_grid(poly: PolygonInstance, spec: Optional[GridSpec] = None) -> GridLabels:
    spec = spec or poly.grid_spec()
    pts = spec.centers()
    return GridLabels(pts[:, 0], pts[:, 1], points_in_polygon(poly.vertices, pts))


@dataclass(frozen=True)
class PolygonRecord:
    n_vertices: int
    seed: int
    s_mean: float
    s_median: float
    s_max: float
    f_mean: float
    f_median: float
    f_max: float

    @property
    def ratio_mean(self) -> float:
        return self.f_mean / self.f_max if self.f_max > 0 else 0.0

    @property
    def ratio_median(self) -> float:
        return self.f_median / self.f_max if self.f_max > 0 else 0.0


@dataclass(frozen=True)
class RatioSummary:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float

    @classmethod
    def of(cls, values) -> "RatioSummary":
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            nan = float("nan")
            return cls(nan, nan, nan, nan, nan, nan)
        q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0])
        return cls(*map(float, q), float(v.mean()))


@dataclass(frozen=True)
class VertexAggregate:
    n_vertices: int
    n_used: int
    n_excluded: int
    ratio_mean: RatioSummary
    ratio_median: RatioSummary


@dataclass(frozen=True)
class SimulationReport:
    records: list
    aggregates: list
    failures: list = field(default_factory=list)  # (n_vertices, seed, message)

    def ratios(self, which: str = "mean") -> np.ndarray:
        attr = "ratio_mean" if which == "mean" else "ratio_median"
        return np.array([getattr(r, attr) for r in self.records])


@dataclass(frozen=True)
class _Job:
    n_vertices: int
    seed: int
    n_sample: int
    f: float
    s_grid_size: int
    r_min: float
    r_max: float
    resolution: int
    delta: float
    kkt_tolerance: float


def _f1_at(train_data, s, truth, pts, f, tol) -> float:
    cfg = TrainConfig(
        outlier_fraction=f,
        kkt_tolerance=tol,
        bandwidth=BandwidthConfig(criterion="fixed", fixed_value=s),
    )
    model = train(train_data, cfg)
    rep = classify(model, pts)
    return f1_score(confusion(~rep.is_outlier, truth))


def evaluate_instance(
    poly: PolygonInstance,
    n_sample: int = 600,
    f: float = 0.001,
    s_grid_size: int = 30,
    resolution: int = DEFAULT_RESOLUTION,
    delta: float = DEFAULT_DELTA,
    kkt_tolerance: float = 1e-6,
) -> PolygonRecord:
    """F1 at the mean and median criteria and the best F1 for one polygon.

    The interior sample is drawn with ``poly.seed``. A failed fit at one of
    the two criterion bandwidths is raised; failures elsewhere on the search
    grid only drop that grid point.
    """
    data = sample_interior(poly, n_sample, poly.seed)
    labels = label_grid(poly, poly.grid_spec(resolution))
    pts = np.column_stack([labels.x, labels.y])

    s_mean = mean_criterion(data, delta)
    s_median = median_criterion(data, delta, exact=True)
    grid = np.geomspace(s_mean / 10, s_mean * 10, s_grid_size)
    candidates = sorted(set(float(s) for s in grid) | {s_mean, s_median})

    trace = []
    for s in candidates:
        try:
            f1 = _f1_at(data, s, labels.inside, pts, f, kkt_tolerance)
        except SvddError as exc:
            if s in (s_mean, s_median):
                raise
            log.warning("polygon seed %d: fit failed at s=%g: %s", poly.seed, s, exc)
            f1 = -1.0
        trace.append((s, f1))
    by_s = dict(trace)
    s_max, f_max = best_of(trace)
    return PolygonRecord(
        n_vertices=poly.n_vertices,
        seed=poly.seed,
        s_mean=s_mean,
        s_median=s_median,
        s_max=s_max,
        f_mean=by_s[s_mean],
        f_median=by_s[s_median],
        f_max=f_max,
    )


def evaluate_polygon(job: _Job) -> PolygonRecord:
    poly = generate_polygon(job.n_vertices, job.r_min, job.r_max, job.seed)
    return evaluate_instance(
        poly, job.n_sample, job.f, job.s_grid_size, job.resolution, job.delta, job.kkt_tolerance
    )


def _run_job(job: _Job):
    try:
        return evaluate_polygon(job)
    except SvddError as exc:
        return exc


def run_simulation(
    vertex_counts: Sequence[int],
    polygons_per_count: int = 20,
    n_sample: int = 600,
    f: float = 0.001,
    s_grid_size: int = 30,
    seed: int = 0,
    r_min: float = 3.0,
    r_max: float = 5.0,
    resolution: int = DEFAULT_RESOLUTION,
    delta: float = DEFAULT_DELTA,
    kkt_tolerance: float = 1e-6,
    n_jobs: int = 1,
    progress: Optional[callable] = None,
) -> SimulationReport:
    """Run the random-polygon study.

    Polygon k (counted globally in vertex-count order) uses seed
    ``seed + k`` both for its shape and, on a separate stream, for its
    interior sample, so results do not depend on ``n_jobs``.
    """
    vertex_counts = list(vertex_counts)
    if not vertex_counts or any(v < 3 for v in vertex_counts):
        raise BadParams("vertex counts must all be >= 3")
    if polygons_per_count < 1 or n_sample < 2 or s_grid_size < 1:
        raise BadParams("polygons_per_count >= 1, n_sample >= 2 and s_grid_size >= 1 required")
    if not (0 < f <= 1):
        raise BadParams(f"outlier fraction must lie in (0, 1], got {f}")

    jobs = []
    k = 0
    for nv in vertex_counts:
        for _ in range(polygons_per_count):
            jobs.append(
                _Job(nv, seed + k, n_sample, f, s_grid_size, r_min, r_max, resolution, delta, kkt_tolerance)
            )
            k += 1

    results = _map(jobs, n_jobs, progress)
    records, failures = [], []
    for job, res in zip(jobs, results):
        if isinstance(res, Exception):
            failures.append((job.n_vertices, job.seed, str(res)))
        else:
            records.append(res)

    aggregates = []
    for nv in dict.fromkeys(vertex_counts):
        rs = [r for r in records if r.n_vertices == nv]
        aggregates.append(
            VertexAggregate(
                n_vertices=nv,
                n_used=len(rs),
                n_excluded=sum(1 for fv, _, _ in failures if fv == nv),
                ratio_mean=RatioSummary.of([r.ratio_mean for r in rs]),
                ratio_median=RatioSummary.of([r.ratio_median for r in rs]),
            )
        )
    return SimulationReport(records=records, aggregates=aggregates, failures=failures)


def _map(jobs, n_jobs, progress) -> Iterable:
    out = []
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            for i, res in enumerate(ex.map(_run_job, jobs)):
                out.append(res)
                if progress:
                    progress(i + 1, len(jobs))
        return out
    for i, job in enumerate(jobs):
        out.append(_run_job(job))
        if progress:
            progress(i + 1, len(jobs))
    return out
