import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import distance_to_boundary, ray_crossings, shoelace_area, winding_number
from svddbw.errors import BadParams
from svddbw.polygon import (
    PolygonInstance,
    RatioSummary,
    evaluate_instance,
    generate_polygon,
    label_grid,
    point_in_polygon,
    points_in_polygon,
    regular_polygon,
    run_simulation,
    sample_interior,
)
from svddbw.scoring import GridSpec

seeds = st.integers(0, 2**31 - 1)
vertex_counts = st.integers(3, 40)


class TestGenerate:
    def test_degenerate_radius_triangle(self):
        poly = generate_polygon(3, 1.0, 1.0, seed=0)
        np.testing.assert_allclose(np.linalg.norm(poly.vertices, axis=1), 1.0, rtol=1e-15)
        assert poly.n_vertices == 3

    def test_pentagon_radii(self):
        poly = generate_polygon(5, 3.0, 5.0, seed=1)
        norms = np.linalg.norm(poly.vertices, axis=1)
        assert np.all((norms >= 3.0) & (norms <= 5.0))

    def test_deterministic(self):
        a, b = generate_polygon(12, seed=99), generate_polygon(12, seed=99)
        np.testing.assert_array_equal(a.vertices, b.vertices)
        assert not np.array_equal(a.vertices, generate_polygon(12, seed=100).vertices)

    @pytest.mark.parametrize("args", [(2, 3.0, 5.0), (5, 0.0, 5.0), (5, 5.0, 3.0), (5, 3.0, math.inf)])
    def test_bad_params(self, args):
        with pytest.raises(BadParams):
            generate_polygon(*args)

    @settings(max_examples=40, deadline=None)
    @given(vertex_counts, seeds)
    def test_invariants(self, n, seed):
        poly = generate_polygon(n, 3.0, 5.0, seed)
        assert np.all(np.diff(poly.angles) > 0)
        assert poly.angles[0] > 0 and poly.angles[-1] < 2 * np.pi
        assert np.all((poly.radii >= 3.0) & (poly.radii <= 5.0))

    @settings(max_examples=15, deadline=None)
    @given(vertex_counts, seeds)
    def test_star_shaped_single_crossing(self, n, seed):
        poly = generate_polygon(n, 3.0, 5.0, seed)
        for k in range(360):
            angle = 2 * np.pi * (k + 0.5) / 360
            assert ray_crossings(poly.vertices, angle) == 1


class TestPointInPolygon:
    @settings(max_examples=40, deadline=None)
    @given(vertex_counts, seeds)
    def test_origin_inside(self, n, seed):
        assert point_in_polygon(generate_polygon(n, 3.0, 5.0, seed), [0.0, 0.0])

    @settings(max_examples=40, deadline=None)
    @given(vertex_counts, seeds, st.floats(0, 2 * math.pi), st.floats(1e-6, 100))
    def test_beyond_r_max_outside(self, n, seed, angle, extra):
        poly = generate_polygon(n, 3.0, 5.0, seed)
        r = 5.0 + extra
        assert not point_in_polygon(poly, [r * math.cos(angle), r * math.sin(angle)])

    @pytest.mark.parametrize("n,seed", [(5, 0), (17, 1), (30, 2)])
    def test_matches_winding_oracle(self, n, seed):
        poly = generate_polygon(n, 3.0, 5.0, seed)
        pts = np.random.default_rng(seed + 50).uniform(-5.5, 5.5, size=(1000, 2))
        fast = points_in_polygon(poly.vertices, pts)
        for p, got in zip(pts, fast):
            if distance_to_boundary(poly.vertices, p) <= 1e-12:
                continue
            assert got == (winding_number(poly.vertices, p) != 0)

    def test_vertices_and_edges_count_inside(self):
        poly = generate_polygon(8, 3.0, 5.0, seed=4)
        v = poly.vertices
        mids = 0.5 * (v + np.roll(v, -1, axis=0))
        assert points_in_polygon(v, v).all()
        assert points_in_polygon(v, mids).all()


class TestSampleInterior:
    def test_600_points_inside(self):
        poly = generate_polygon(20, 3.0, 5.0, seed=3)
        data = sample_interior(poly, 600, seed=3)
        assert data.n == 600
        assert points_in_polygon(poly.vertices, data.rows).all()

    def test_square_centroid(self):
        square = regular_polygon(4, radius=4.0, offset=np.pi / 4)
        side = 4.0 * math.sqrt(2)
        n = 600
        sigma = side / math.sqrt(12) / math.sqrt(n)
        for seed in range(10):
            mean = sample_interior(square, n, seed).rows.mean(axis=0)
            assert np.all(np.abs(mean) <= 5 * sigma)

    def test_deterministic(self):
        poly = generate_polygon(9, seed=5)
        np.testing.assert_array_equal(sample_interior(poly, 50, 8).rows, sample_interior(poly, 50, 8).rows)

    def test_bad_size(self):
        with pytest.raises(BadParams):
            sample_interior(generate_polygon(5), 0, 1)


class TestLabelGrid:
    def test_default_resolution(self):
        labels = label_grid(generate_polygon(6, seed=2))
        assert len(labels) == 40000

    def test_covering_triangle(self):
        tri = PolygonInstance(
            vertices=np.array([[-100.0, -100.0], [100.0, -100.0], [0.0, 100.0]]),
            angles=np.zeros(3), radii=np.zeros(3), r_min=1.0, r_max=1.0, seed=0,
        )
        labels = label_grid(tri, GridSpec(-1, 1, -1, 1, 50))
        assert labels.inside.all()

    @pytest.mark.parametrize("n,seed", [(5, 0), (5, 1), (15, 2), (15, 3), (30, 4), (30, 5)])
    def test_area_estimate(self, n, seed):
        poly = generate_polygon(n, 3.0, 5.0, seed)
        spec = poly.grid_spec(200)
        labels = label_grid(poly, spec)
        window = (spec.x_max - spec.x_min) * (spec.y_max - spec.y_min)
        estimate = labels.inside.mean() * window
        assert estimate == pytest.approx(shoelace_area(poly.vertices), rel=0.02)
        assert poly.area() == pytest.approx(shoelace_area(poly.vertices), rel=1e-12)


class TestSimulation:
    KW = dict(n_sample=80, s_grid_size=6, resolution=40)

    def test_small_run(self):
        rep = run_simulation([5, 8], polygons_per_count=2, seed=3, **self.KW)
        assert len(rep.records) + len(rep.failures) == 4
        assert [a.n_vertices for a in rep.aggregates] == [5, 8]
        for r in rep.records:
            assert 0 <= r.ratio_mean <= 1 + 1e-9 and 0 <= r.ratio_median <= 1 + 1e-9
            assert r.f_max >= r.f_mean and r.f_max >= r.f_median
        assert [r.seed for r in rep.records] == [3, 4, 5, 6][: len(rep.records)]

    def test_deterministic_and_job_independent(self):
        a = run_simulation([6], polygons_per_count=3, seed=11, **self.KW)
        b = run_simulation([6], polygons_per_count=3, seed=11, n_jobs=2, **self.KW)
        assert a.records == b.records

    @pytest.mark.parametrize("kw", [dict(vertex_counts=[2]), dict(vertex_counts=[]),
                                    dict(vertex_counts=[5], polygons_per_count=0),
                                    dict(vertex_counts=[5], f=0.0)])
    def test_bad_params(self, kw):
        with pytest.raises(BadParams):
            run_simulation(**kw)

    def test_ratio_summary(self):
        s = RatioSummary.of([0.5, 1.0, 0.75, 0.25, 0.0])
        assert (s.minimum, s.q1, s.median, s.q3, s.maximum) == (0.0, 0.25, 0.5, 0.75, 1.0)
        assert s.mean == pytest.approx(0.5)
        assert math.isnan(RatioSummary.of([]).median)

    @pytest.mark.slow
    def test_square_polygon_pipeline(self):
        square = regular_polygon(4, radius=4.0, offset=np.pi / 4, seed=0)
        rec = evaluate_instance(square, n_sample=600)
        assert rec.ratio_mean >= 0.8
        assert rec.ratio_mean <= 1.0 and rec.ratio_median <= 1.0
