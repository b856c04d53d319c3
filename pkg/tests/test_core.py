import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from roughlab import (ControlledPath, Grid, chen_compose, chen_pair, controlled_distance,
                      controlled_seminorm, holder_norms, make_grid, remainders, rough_distance,
                      rough_identity)
from roughlab.core import RoughPath, fixed_point_metric, remainder_norms, segment_areas, sup_gap
from roughlab.errors import GridError, ShapeError
from roughlab.lift import coarsen, lift_piecewise_linear, relift_linear

from conftest import bm_path


def linear_t(n, alpha=0.5):
    g = make_grid(1.0, n)
    return lift_piecewise_linear(g.times, alpha, g)


def random_controlled(R, gen, u=2):
    y = gen.normal(size=(R.n + 1, u)).cumsum(axis=0) * 0.1
    yp = gen.normal(size=(R.n + 1, u, 1, R.d))
    return ControlledPath(R, y, yp)


class TestGrid:
    def test_uniform_example(self):
        assert make_grid(1.0, 4).times.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_single_cell(self):
        assert make_grid(2.0, 1).times.tolist() == [0.0, 2.0]

    def test_dyadic_needs_power_of_two(self):
        with pytest.raises(GridError):
            make_grid(1.0, 3, "dyadic")
        assert make_grid(1.0, 8, "dyadic").n == 8

    @pytest.mark.parametrize("T,n", [(0.0, 4), (-1.0, 4), (1.0, 0), (1.0, 2.5)])
    def test_rejects_bad_arguments(self, T, n):
        with pytest.raises(GridError):
            make_grid(T, n)

    def test_uniform_width_ratio(self):
        w = np.diff(make_grid(3.7, 1000).times)
        assert w.max() / w.min() <= 1 + 1e-12

    def test_grid_validation(self):
        with pytest.raises(GridError):
            Grid(np.array([0.1, 0.5]))
        with pytest.raises(GridError):
            Grid(np.array([0.0, 0.5, 0.5]))
        with pytest.raises(GridError):
            Grid(np.array([0.0]))

    def test_sub_is_shifted(self):
        g = make_grid(1.0, 8).sub(2, 6)
        assert g.times[0] == 0.0 and g.n == 4 and g.T == pytest.approx(0.5)


class TestChen:
    def test_empty_interval(self, bm2):
        inc, area = chen_pair(bm2, 7, 7)
        assert not inc.any() and not area.any()

    def test_linear_path_area(self):
        inc, area = chen_pair(linear_t(16), 0, 16)
        assert inc[0] == pytest.approx(1.0)
        assert area[0, 0] == pytest.approx(0.5, abs=1e-15)

    def test_matches_cell_loop_bitwise(self, bm2):
        d = bm2.d
        area = np.zeros((d, d))
        for k in range(3, 200):
            area += bm2.xx[k] + np.outer(bm2.x[k] - bm2.x[3], bm2.x[k + 1] - bm2.x[k])
        assert np.array_equal(chen_pair(bm2, 3, 200)[1], area)

    def test_composition(self, bm2):
        gen = np.random.default_rng(0)
        for _ in range(200):
            i, k, j = np.sort(gen.choice(bm2.n + 1, 3, replace=False))
            a = chen_pair(bm2, i, j)
            b = chen_compose(chen_pair(bm2, i, k), chen_pair(bm2, k, j))
            np.testing.assert_allclose(a[0], b[0], rtol=1e-12, atol=1e-14)
            assert np.linalg.norm(a[1] - b[1]) <= 1e-12 * max(1.0, np.linalg.norm(a[1]))

    def test_index_errors(self, bm2):
        with pytest.raises(IndexError):
            chen_pair(bm2, 5, 3)
        with pytest.raises(IndexError):
            chen_pair(bm2, 0, bm2.n + 1)

    def test_prefix_cache_agrees(self, bm2):
        for j in (1, 17, bm2.n):
            np.testing.assert_allclose(bm2.area_from_origin[j], chen_pair(bm2, 0, j)[1],
                                       rtol=1e-12, atol=1e-13)

    def test_segment_areas(self, bm2):
        nodes = np.array([0, 3, 40, 41, 300, bm2.n])
        areas = segment_areas(bm2, nodes)
        for k, (a, b) in enumerate(zip(nodes[:-1], nodes[1:])):
            np.testing.assert_allclose(areas[k], chen_pair(bm2, a, b)[1], rtol=1e-12, atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, (9, 2), elements=st.floats(-10, 10)),
           st.integers(0, 8), st.integers(0, 8), st.integers(0, 8))
    def test_chen_property(self, x, a, b, c):
        g = make_grid(1.0, 8)
        R = lift_piecewise_linear(x, 0.4, g)
        i, k, j = sorted((a, b, c))
        lhs = chen_pair(R, i, j)
        rhs = chen_compose(chen_pair(R, i, k), chen_pair(R, k, j))
        scale = 1.0 + np.abs(x).max() ** 2
        assert np.abs(lhs[1] - rhs[1]).max() <= 1e-12 * scale * 8


def brute_holder(values, t, expo):
    v = values.reshape(len(values), -1)
    diff = v[None, :, :] - v[:, None, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    dt = t[None, :] - t[:, None]
    iu = np.triu_indices(len(t), 1)
    return (dist[iu] / dt[iu] ** expo).max()


class TestHolder:
    def test_constant_path(self):
        g = make_grid(1.0, 32)
        R = lift_piecewise_linear(np.full((33, 2), 3.0), 0.4, g)
        rep = holder_norms(R)
        assert rep.x_alpha == 0.0 and rep.xx_2alpha == 0.0

    def test_linear_half(self):
        assert holder_norms(linear_t(64)).x_alpha == pytest.approx(1.0, rel=1e-12)

    def test_bm_against_brute_force(self):
        R = bm_path(1024, d=1, seed=7)
        t = R.grid.times
        rep = holder_norms(R)
        assert rep.x_alpha == pytest.approx(brute_holder(R.x, t, 0.45), rel=1e-12)
        # A_ij = A_0j - A_0i - X_0i X_ij from the prefix areas (Chen)
        A = R.area_from_origin[:, 0, 0]
        x = R.x[:, 0]
        Aij = A[None, :] - A[:, None] - (x[:, None] - x[0]) * (x[None, :] - x[:, None])
        dt = t[None, :] - t[:, None]
        iu = np.triu_indices(len(t), 1)
        brute = (np.abs(Aij[iu]) / dt[iu] ** 0.9).max()
        assert rep.xx_2alpha == pytest.approx(brute, rel=1e-9)

    def test_scale_covariance(self, bm2):
        lam = -2.5
        S = lift_piecewise_linear(lam * bm2.x, bm2.alpha, bm2.grid)
        a, b = holder_norms(bm2), holder_norms(S)
        assert b.x_alpha == pytest.approx(abs(lam) * a.x_alpha, rel=1e-12)
        assert b.xx_2alpha == pytest.approx(lam ** 2 * a.xx_2alpha, rel=1e-12)

    def test_seminorm_decomposition(self, pair2):
        Y, _ = pair2
        rep = holder_norms(Y.base, Y)
        assert rep.seminorm == rep.r0_2alpha + rep.r1_alpha
        assert controlled_seminorm(Y) == pytest.approx(rep.seminorm, rel=1e-14)
        assert min(rep.x_alpha, rep.xx_2alpha, rep.r0_2alpha, rep.r1_alpha) >= 0
        assert rep.pairs_scanned == Y.n * (Y.n + 1) // 2


class TestRemainders:
    def test_first_order_exact(self):
        R = linear_t(16)
        Y = rough_identity(R)
        for i, j in [(0, 16), (3, 9), (5, 5)]:
            r0, r1 = remainders(Y, i, j)
            assert np.abs(r0).max() == 0.0 and np.abs(r1).max() == 0.0

    def test_constants(self, bm1):
        Y = ControlledPath(bm1, np.full(bm1.n + 1, 2.0), np.zeros(bm1.n + 1))
        assert controlled_seminorm(Y) == 0.0

    def test_quadratic(self):
        R = linear_t(32)
        t = R.grid.times
        Y = ControlledPath(R, t ** 2, 2 * t)
        for i, j in [(0, 32), (4, 20), (10, 11)]:
            r0, _ = remainders(Y, i, j)
            assert r0.item() == pytest.approx((t[j] - t[i]) ** 2, rel=1e-12, abs=1e-16)

    def test_shape_validation(self, bm1):
        with pytest.raises(ShapeError):
            ControlledPath(bm1, np.zeros(bm1.n), np.zeros(bm1.n))
        with pytest.raises(ShapeError):
            ControlledPath(bm1, np.zeros((bm1.n + 1, 2)), np.zeros((bm1.n + 1, 3)))


class TestDistances:
    def test_self_distance_and_symmetry(self, bm2):
        gen = np.random.default_rng(1)
        Y, Z = random_controlled(bm2, gen), random_controlled(bm2, gen)
        assert controlled_distance(Y, Y) == 0.0
        assert controlled_distance(Y, Z) == pytest.approx(controlled_distance(Z, Y), rel=1e-14)

    def test_triangle_inequality(self):
        R = bm_path(64, d=2, seed=2)
        gen = np.random.default_rng(2)
        for _ in range(100):
            a, b, c = (random_controlled(R, gen) for _ in range(3))
            assert controlled_distance(a, c) <= (controlled_distance(a, b)
                                                 + controlled_distance(b, c)) + 1e-12

    def test_distance_across_bases(self, bm2):
        other = relift_linear(bm2, 4)
        Y, Yt = rough_identity(bm2), rough_identity(other)
        # (X, id) has no remainders on either base
        assert controlled_distance(Y, Yt) == pytest.approx(0.0, abs=1e-12)

    def test_mismatch(self, bm2, bm1):
        with pytest.raises(ShapeError):
            controlled_distance(rough_identity(bm2), rough_identity(bm_path(512, d=3, seed=1)))
        with pytest.raises(GridError):
            controlled_distance(rough_identity(bm1), rough_identity(bm_path(256, seed=1)))

    def test_rough_distance_zero(self, bm2):
        assert rough_distance(bm2, bm2) == 0.0
        shifted = RoughPath(bm2.grid, bm2.x + 4.0, bm2.xx, bm2.alpha)
        assert rough_distance(bm2, shifted) == pytest.approx(0.0, abs=1e-12)

    def test_rough_distance_refinement(self):
        fine = bm_path(1024, d=2, seed=9)
        dists = []
        for n in (64, 128, 256, 512, 1024):
            R = coarsen(fine, 1024 // n)
            dists.append(rough_distance(R, relift_linear(R, 2)))
        assert all(d > 0 for d in dists)
        assert dists[-1] < dists[0]

    def test_rough_distance_mismatch(self, bm2, bm1):
        with pytest.raises(GridError):
            rough_distance(bm2, bm_path(256, d=2))
        with pytest.raises(ShapeError):
            rough_distance(bm1, bm2)

    def test_metric_sees_constants(self, bm1):
        Y = rough_identity(bm1)
        Z = ControlledPath(bm1, Y.y + 1.0, Y.yprime)
        assert controlled_distance(Y, Z) == pytest.approx(0.0, abs=1e-12)
        assert sup_gap(Y, Z) == pytest.approx(1.0)
        assert fixed_point_metric(Y, Z) == pytest.approx(1.0)

    def test_remainder_norms_nonnegative(self, pair2):
        r0, r1 = remainder_norms(pair2[0])
        assert r0 > 0 and r1 > 0
