import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import projected_gradient_qp
from svddbw.core import BOUNDARY, INSIDE, OUTSIDE, BandwidthConfig, Dataset, TrainConfig
from svddbw.datasets import two_clusters
from svddbw.errors import BadBandwidth, Infeasible, NoBoundarySV
from svddbw.scoring import distance2_many
from svddbw.solver import ConvergenceWarning, kernel_matrix, kkt_violation, solve_dual, train

R2_TWO_POINT = 0.196734670143683288198100232504  # 0.5 - 0.5 exp(-1/2), mpmath


def fixed(s, f=0.5, **kw):
    return TrainConfig(outlier_fraction=f, bandwidth=BandwidthConfig("fixed", fixed_value=s), **kw)


class TestKernelMatrix:
    def test_single_point(self):
        np.testing.assert_array_equal(kernel_matrix([[3.0, 4.0]], 0.7), [[1.0]])

    def test_two_points(self):
        K = kernel_matrix([[0.0], [1.0]], 1.0)
        assert K[0, 1] == pytest.approx(0.606530659712633423603799534991, rel=1e-15)
        assert K[0, 1] == K[1, 0]

    def test_huge_bandwidth(self):
        x = np.random.default_rng(0).normal(size=(20, 3)) * 100
        assert np.all(np.abs(kernel_matrix(x, 1e12) - 1) <= 1e-9)

    def test_structure(self):
        x = np.random.default_rng(1).normal(size=(40, 2))
        K = kernel_matrix(x, 0.3)
        assert np.all(np.diag(K) == 1.0)
        np.testing.assert_array_equal(K, K.T)
        assert np.all((K > 0) | (K == 0)) and np.all(K <= 1)

    @pytest.mark.parametrize("s", [0.0, -1.0, float("nan"), float("inf")])
    def test_bad_bandwidth(self, s):
        with pytest.raises(BadBandwidth):
            kernel_matrix([[0.0], [1.0]], s)


class TestSolveDual:
    def test_single_point(self):
        sol = solve_dual(np.ones((1, 1)), 1.0)
        np.testing.assert_array_equal(sol.alphas, [1.0])
        assert sol.objective == 0.0 and sol.converged

    def test_two_points_symmetric(self):
        K = kernel_matrix([[0.0, 0.0], [1.0, 0.0]], 1.0)
        sol = solve_dual(K, 1.0, 1e-6)
        np.testing.assert_allclose(sol.alphas, [0.5, 0.5], atol=1e-6)

    def test_infeasible(self):
        with pytest.raises(Infeasible):
            solve_dual(np.eye(4), 0.2)

    def test_matches_projected_gradient(self):
        x = np.random.default_rng(30).normal(size=(30, 2))
        K = kernel_matrix(x, 0.8)
        C = 1 / (30 * 0.1)
        sol = solve_dual(K, C, 1e-9, 10**6)
        _, ref = projected_gradient_qp(K, C)
        assert sol.converged
        assert float(sol.alphas @ K @ sol.alphas) == pytest.approx(ref, abs=1e-6)
        assert sol.objective == pytest.approx(1 - ref, abs=1e-6)

    def test_duplicate_points(self):
        x = np.array([[0.0], [0.0], [1.0], [1.0], [1.0]])
        sol = solve_dual(kernel_matrix(x, 0.5), 1.0, 1e-9)
        assert sol.converged
        assert sol.alphas[:2].sum() == pytest.approx(0.5, abs=1e-8)

    def test_feasible_and_monotone_along_path(self):
        x = np.random.default_rng(7).normal(size=(25, 2))
        K = kernel_matrix(x, 0.5)
        C = 1 / (25 * 0.2)
        prev = math.inf
        for k in range(0, 120, 3):
            a = solve_dual(K, C, 1e-12, max_iter=k).alphas
            assert a.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(a >= 0) and np.all(a <= C)
            q = float(a @ K @ a)
            assert q <= prev + 1e-15
            prev = q

    def test_not_converged_is_flagged(self):
        x = np.random.default_rng(8).normal(size=(50, 2))
        sol = solve_dual(kernel_matrix(x, 1.0), 1.0, 1e-12, max_iter=2)
        assert not sol.converged and sol.iterations == 2

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(3, 40), st.floats(0.05, 1.0))
    def test_kkt_at_exit(self, seed, n, f):
        x = np.random.default_rng(seed).normal(size=(n, 2))
        K = kernel_matrix(x, 0.7)
        C = 1 / (n * f)
        sol = solve_dual(K, C, 1e-7, 10**6)
        assert sol.converged
        assert kkt_violation(K, sol.alphas, C) <= 1e-7
        assert sol.alphas.sum() == pytest.approx(1.0, abs=1e-9)
        assert np.all(sol.alphas >= 0) and np.all(sol.alphas <= C)


def per_sv_r2(model, x):
    boundary = x[model.position_tags == BOUNDARY]
    return distance2_many(model, boundary)


def check_duality(model, x, slack):
    d2 = distance2_many(model, x)
    r2 = model.threshold
    tags = model.position_tags
    assert np.all(d2[tags == INSIDE] <= r2 + slack)
    assert np.all(d2[tags == OUTSIDE] >= r2 - slack)
    assert np.all(np.abs(d2[tags == BOUNDARY] - r2) <= slack)


class TestTrain:
    def test_two_points(self):
        m = train(Dataset([[0.0, 0.0], [1.0, 0.0]]), fixed(1.0, f=0.5))
        assert m.penalty == 1.0
        np.testing.assert_allclose(m.alphas, [0.5, 0.5], atol=1e-6)
        assert list(m.position_tags) == [BOUNDARY, BOUNDARY]
        assert m.threshold == pytest.approx(R2_TWO_POINT, abs=1e-9)

    def test_no_outside_when_c_exceeds_one(self):
        x = np.random.default_rng(2).normal(size=(60, 3))
        m = train(Dataset(x), TrainConfig(outlier_fraction=0.01))
        assert m.penalty > 1
        assert m.count(OUTSIDE) == 0
        assert np.all(m.alphas <= 1)

    def test_threshold_independent_of_boundary_sv(self):
        x = two_clusters(100, seed=4).rows
        m = train(Dataset(x), TrainConfig(outlier_fraction=0.05, kkt_tolerance=1e-9))
        vals = per_sv_r2(m, x)
        assert vals.size >= 2
        assert np.ptp(vals) <= 1e-8
        assert np.all(np.abs(vals - m.threshold) <= 1e-8)

    @pytest.mark.parametrize("f", [0.001, 0.05, 0.2, 0.5])
    @pytest.mark.parametrize("s", [None, 2.0])
    def test_duality_positions(self, f, s):
        x = np.random.default_rng(9).normal(size=(80, 2))
        tol = 1e-6
        cfg = TrainConfig(outlier_fraction=f, kkt_tolerance=tol)
        if s is not None:
            cfg = fixed(s, f=f, kkt_tolerance=tol)
        m = train(Dataset(x), cfg)
        check_duality(m, x, 10 * tol)
        assert np.all(np.abs(per_sv_r2(m, x) - m.threshold) <= 10 * tol)
        assert m.alphas.sum() == pytest.approx(1.0, abs=tol * len(x))
        if s is not None and f >= 0.05:
            assert m.count(OUTSIDE) > 0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=(70, 2))
        perm = rng.permutation(70)
        cfg = TrainConfig(outlier_fraction=0.1, kkt_tolerance=1e-9)
        a = train(Dataset(x), cfg)
        b = train(Dataset(x[perm]), cfg)
        assert a.threshold == pytest.approx(b.threshold, abs=1e-7)
        assert set(a.support_index) == set(perm[b.support_index])

    def test_weights_equal_expanded_training(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(20, 2))
        w = rng.integers(1, 4, size=20)
        s = 0.6
        weighted = train(Dataset(x, weights=w), fixed(s, f=0.1, kkt_tolerance=1e-9))
        expanded = train(Dataset(np.repeat(x, w, axis=0)), fixed(s, f=0.1, kkt_tolerance=1e-9))
        z = rng.normal(size=(50, 2))
        np.testing.assert_allclose(distance2_many(weighted, z), distance2_many(expanded, z), atol=1e-7)
        assert weighted.threshold == pytest.approx(expanded.threshold, abs=1e-7)

    def test_huge_bandwidth_everything_inlier(self):
        x = np.random.default_rng(14).normal(size=(40, 2))
        m = train(Dataset(x), fixed(1e6, f=0.01))
        d2 = distance2_many(m, x * 1.5)
        assert np.all(d2 < 1e-9)
        assert np.all(d2 <= m.threshold + 1e-9)

    def test_tiny_bandwidth_every_point_is_sv(self):
        x = np.random.default_rng(15).normal(size=(40, 2))
        m = train(Dataset(x), fixed(1e-4, f=0.5))
        assert m.penalty < 1
        assert m.n_support == 40

    def test_all_at_ceiling(self):
        with pytest.raises(NoBoundarySV):
            train(Dataset([[0.0], [1.0], [3.0]]), fixed(1.0, f=1.0))

    def test_nonconverged_model_still_returned(self):
        x = np.random.default_rng(16).normal(size=(60, 2))
        with pytest.warns(ConvergenceWarning):
            m = train(Dataset(x), TrainConfig(outlier_fraction=0.1, max_iterations=1))
        assert not m.converged
        assert m.threshold >= 0

    def test_criterion_recorded(self):
        x = np.random.default_rng(17).normal(size=(30, 2))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            m = train(Dataset(x), TrainConfig(0.01, bandwidth=BandwidthConfig("median")))
        assert m.criterion == "median" and m.n_train == 30
