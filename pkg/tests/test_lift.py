import numpy as np
import pytest

from roughlab import chen_pair, make_grid, rough_distance
from roughlab.errors import GridError, ShapeError
from roughlab.lift import (SignalSpec, coarsen, lift_ito, lift_piecewise_linear, relift_linear,
                           rng, sample_signal, signal_path)

from conftest import bm_path


class TestSampling:
    def test_sin_closed_form(self):
        x = sample_signal(SignalSpec("sin", 1, {"omega": 2 * np.pi}), make_grid(1.0, 4))
        np.testing.assert_allclose(x[:, 0], [0, 1, 0, -1, 0], atol=1e-15)

    def test_bm_deterministic(self):
        spec = SignalSpec("bm", 3, seed=2 ** 63 + 5)
        g = make_grid(1.0, 64)
        assert np.array_equal(sample_signal(spec, g), sample_signal(spec, g))
        assert not np.array_equal(sample_signal(spec, g, 0), sample_signal(spec, g, 1))

    def test_rng_streams_independent_of_order(self):
        a = rng(7, 3).standard_normal(4)
        rng(7, 1).standard_normal(100)
        assert np.array_equal(a, rng(7, 3).standard_normal(4))

    def test_bm_variance(self):
        g = make_grid(1.0, 64)
        inc = np.concatenate([np.diff(sample_signal(SignalSpec("bm", 1, seed=s), g), axis=0)
                              for s in range(200)])
        assert inc.var() == pytest.approx(1 / 64, rel=0.1)

    def test_fbm_half_is_bm(self):
        g = make_grid(1.0, 32)
        inc = np.concatenate([np.diff(sample_signal(SignalSpec("fbm", 1, {"hurst": 0.5}, seed=s), g),
                                      axis=0) for s in range(200)])
        assert inc.var() == pytest.approx(1 / 32, rel=0.1)

    def test_fbm_hurst_one_is_a_ray(self):
        x = sample_signal(SignalSpec("fbm", 2, {"hurst": 1.0}, seed=1), make_grid(1.0, 8))
        slopes = x[1:] / make_grid(1.0, 8).times[1:, None]
        np.testing.assert_allclose(slopes, np.broadcast_to(slopes[0], slopes.shape))

    @pytest.mark.parametrize("H", [0.3, 1 / 3, 1.2])
    def test_fbm_hurst_range(self, H):
        with pytest.raises(ValueError):
            SignalSpec("fbm", 1, {"hurst": H})

    def test_fbm_size_cap(self):
        with pytest.raises(GridError):
            sample_signal(SignalSpec("fbm", 1, {"hurst": 0.7}), make_grid(1.0, 2 ** 13))

    def test_poly_and_custom(self):
        g = make_grid(2.0, 4)
        x = sample_signal(SignalSpec("poly", 1, {"coefficients": [1.0, 0.0, 3.0]}), g)
        np.testing.assert_allclose(x[:, 0], 1 + 3 * g.times ** 2)
        samples = np.arange(10.0).reshape(5, 2)
        got = sample_signal(SignalSpec("custom-samples", 2, {"samples": samples.tolist()}), g)
        assert np.array_equal(got, samples)
        with pytest.raises(ShapeError):
            sample_signal(SignalSpec("custom-samples", 2, {"samples": [[0, 0]]}), g)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            SignalSpec("levy")


class TestLift:
    def test_one_cell_area(self):
        R = lift_piecewise_linear([0.0, 1.0], 0.5)
        assert R.xx[0, 0, 0] == 0.5

    def test_two_dim_cell(self):
        a, b = 0.3, -1.7
        R = lift_piecewise_linear([[0.0, 0.0], [a, b]], 0.45)
        np.testing.assert_allclose(R.xx[0], 0.5 * np.array([[a * a, a * b], [a * b, b * b]]))

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            lift_piecewise_linear([1.0], 0.4)

    def test_sin_area_against_calculus(self):
        g = make_grid(1.0, 1024)
        R = signal_path(SignalSpec("sin", 1, {"omega": 1.0}), g, 0.5)
        _, area = chen_pair(R, 0, 1024)
        # int_0^T (sin r - sin 0) cos r dr = sin(T)^2 / 2
        assert area[0, 0] == pytest.approx(np.sin(1.0) ** 2 / 2, abs=1e-4)

    def test_global_linear_exactness(self):
        g = make_grid(2.0, 37)
        x = np.outer(g.times, [1.0, -2.0, 0.5])
        R = lift_piecewise_linear(x, 0.4, g)
        inc, area = chen_pair(R, 0, 37)
        np.testing.assert_allclose(area, 0.5 * np.outer(inc, inc), rtol=1e-12, atol=1e-14)

    def test_geometric_symmetry_all_pairs(self):
        R = bm_path(128, d=3, seed=4)
        for i in range(0, 128, 7):
            for j in range(i, 129, 5):
                inc, area = chen_pair(R, i, j)
                sym = 0.5 * (area + area.T)
                assert np.abs(sym - 0.5 * np.outer(inc, inc)).max() <= 1e-12

    def test_ito_lift(self):
        g = make_grid(1.0, 16)
        x = sample_signal(SignalSpec("bm", 2, seed=3), g)
        R = lift_ito(x, 0.45, g)
        assert not R.geometric
        dx = np.diff(x, axis=0)
        sym = 0.5 * (R.xx + R.xx.transpose(0, 2, 1))
        expect = 0.5 * (dx[:, :, None] * dx[:, None, :] - np.eye(2) / 16)
        np.testing.assert_allclose(sym, expect, atol=1e-15)

    def test_grid_length_mismatch(self):
        with pytest.raises(ShapeError):
            lift_piecewise_linear(np.zeros(5), 0.4, make_grid(1.0, 8))


class TestCoarsen:
    def test_factor_one(self, bm2):
        C = coarsen(bm2, 1)
        assert np.array_equal(C.x, bm2.x) and np.array_equal(C.xx, bm2.xx)

    def test_associative_bitwise(self, bm2):
        a, b = coarsen(coarsen(bm2, 2), 2), coarsen(bm2, 4)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.xx, b.xx)
        assert np.array_equal(a.grid.times, b.grid.times)

    @pytest.mark.parametrize("f", [2, 8, 64])
    def test_total_area_preserved(self, bm2, f):
        C = coarsen(bm2, f)
        fine = chen_pair(bm2, 0, bm2.n)
        coarse = chen_pair(C, 0, C.n)
        np.testing.assert_allclose(coarse[1], fine[1], rtol=1e-12, atol=1e-13)

    @pytest.mark.parametrize("f", [3, 6, 1024])
    def test_bad_factor(self, bm2, f):
        with pytest.raises(ValueError):
            coarsen(bm2, f)


class TestRelift:
    def test_factor_one_identity(self, bm2):
        R = relift_linear(bm2, 1)
        assert np.array_equal(R.x, bm2.x) and np.array_equal(R.xx, bm2.xx)

    def test_positive_distance(self):
        R = bm_path(1024, d=2, seed=0)
        assert rough_distance(R, relift_linear(R, 16)) > 0

    def test_non_divisor(self, bm2):
        with pytest.raises(ValueError):
            relift_linear(bm2, 5)

    def test_shares_grid_and_nodes(self, bm2):
        R = relift_linear(bm2, 8)
        assert R.grid.same_as(bm2.grid)
        np.testing.assert_array_equal(R.x[::8], bm2.x[::8])

    def test_wong_zakai_refinement(self):
        dists = []
        for seed in range(10):
            R = bm_path(1024, d=2, seed=seed)
            dists.append([rough_distance(R, relift_linear(R, f)) for f in (16, 8, 4, 2)])
        med = np.median(dists, axis=0)
        assert all(b < a for a, b in zip(med, med[1:]))
