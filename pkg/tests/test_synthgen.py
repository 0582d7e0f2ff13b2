import math

import numpy as np
import pytest

from manifold_align import synthgen as sg


class TestCurves:
    def test_swiss_roll_landmarks(self):
        pts = sg.swiss_roll_from_t(np.array([0.0, 0.5]))
        np.testing.assert_allclose(pts[0], [0.0, -1.5 * math.pi], atol=1e-12)
        np.testing.assert_allclose(pts[1], [-3 * math.pi, 0.0], atol=1e-12)

    def test_s_curve_landmarks(self):
        pts = sg.s_curve_from_t(np.array([0.3, 0.3 + 1 / 6]), 0.3)
        np.testing.assert_array_equal(pts[0], [0.0, 0.0])
        np.testing.assert_allclose(pts[1], [1.0, -1.0], atol=1e-12)

    def test_shared_parameter(self):
        _, t1 = sg.gen_swiss_roll(200, 9)
        _, t2 = sg.gen_s_curve(200, 0.5, 9)
        np.testing.assert_array_equal(t1, t2)

    def test_deterministic(self):
        a, _ = sg.gen_swiss_roll(100, 3)
        b, _ = sg.gen_swiss_roll(100, 3)
        assert a == b
        c, _ = sg.gen_swiss_roll(100, 4)
        assert a != c

    def test_points_on_curves(self):
        m, t = sg.gen_swiss_roll(500, 1)
        z = 1.5 * np.pi * (1 + 2 * t)
        np.testing.assert_allclose(np.hypot(*m.data.T), z, atol=1e-9)
        s, t = sg.gen_s_curve(500, 0.37, 1)
        z = 3 * np.pi * (t - 0.37)
        assert np.array_equal(s.data[:, 0], np.sin(z))
        assert np.array_equal(s.data[:, 1], np.sign(z) * (np.cos(z) - 1))

    def test_r_range(self):
        with pytest.raises(ValueError):
            sg.gen_s_curve(10, 1.5, 0)


class TestGaussian:
    def test_moments(self):
        x = sg.gen_gaussian_spot(10_000, 2, 11).data
        assert np.all(np.abs(x.mean(axis=0)) <= 4 / math.sqrt(10_000))
        assert np.all(np.abs(x.var(axis=0) - 1) <= 0.1)

    def test_deterministic(self):
        assert sg.gen_gaussian_spot(50, 3, 2) == sg.gen_gaussian_spot(50, 3, 2)

    def test_perturb_zero_scale(self):
        x = sg.gen_gaussian_spot(20, 3, 0)
        assert sg.perturb(x, 0.0, 5) == x

    def test_perturb_scale(self):
        y = sg.perturb(np.zeros((10_000, 2)), 0.5, 3).data
        assert np.all(np.abs(y.std(axis=0) - 0.5) <= 0.05)

    def test_perturb_seed_separation(self):
        x = sg.gen_gaussian_spot(20, 3, 0)
        assert sg.perturb(x, 0.5, 1) != sg.perturb(x, 0.5, 2)

    def test_lost_correspondence(self):
        a, b = sg.lost_correspondence(10_000, 10, 1, 2)
        assert np.all(a.data != b.data)
        b2, a2 = sg.lost_correspondence(10_000, 10, 2, 1)
        assert a == a2 and b == b2
        with pytest.raises(ValueError):
            sg.lost_correspondence(5, 2, 3, 3)

    def test_lost_rows_uncorrelated(self):
        a, b = sg.lost_correspondence(10_000, 1000, 4, 5)
        corr = np.corrcoef(a.data[:, 0], b.data[:, 0])[0, 1]
        assert abs(corr) <= 4 / math.sqrt(10_000)


class TestTwoSpots:
    def test_second_spot_offset(self):
        x = sg.gen_uniform_two_spots(400, 3, 0.0, 1).data
        assert np.all((x[400:, 0] >= 0.6) & (x[400:, 0] <= 1.6))
        assert np.all(np.abs(x[:400]) <= 0.5)

    def test_shift_only(self):
        a = sg.gen_uniform_two_spots(100, 4, 0.0, 7).data
        b = sg.gen_uniform_two_spots(100, 4, 50.0, 7).data
        np.testing.assert_array_equal(a[:100], b[:100])
        np.testing.assert_array_equal(a[100:, 1:], b[100:, 1:])

    def test_pure_translation(self):
        a = sg.gen_uniform_two_spots(1, 1, 0.0, 3).data
        b = sg.gen_uniform_two_spots(1, 1, 10.0, 3).data
        np.testing.assert_allclose(b - a, [[0.0], [10.0]], atol=1e-12)


class TestRings:
    def test_five_radii(self):
        r = np.round(np.hypot(*sg.gen_rings(500, 5, 1).data.T), 12)
        assert set(r) <= {0.5, 0.75, 1.0, 1.25, 1.5}
        assert len(set(r)) == 5

    def test_full_collapse(self):
        r = np.hypot(*sg.gen_rings(500, 1, 1).data.T)
        np.testing.assert_allclose(r, 0.5, rtol=1e-14)

    def test_angles_shared_across_stages(self):
        a = sg.gen_rings(300, 5, 2).data
        b = sg.gen_rings(300, 2, 2).data
        np.testing.assert_allclose(np.arctan2(a[:, 1], a[:, 0]), np.arctan2(b[:, 1], b[:, 0]), atol=1e-12)

    def test_monotone_nesting(self):
        for s in range(1, 5):
            lo = np.hypot(*sg.gen_rings(200, s, 3).data.T)
            hi = np.hypot(*sg.gen_rings(200, s + 1, 3).data.T)
            assert np.all(lo <= hi + 1e-12)

    @pytest.mark.parametrize("stage", [0, 6, 7])
    def test_invalid_stage(self, stage):
        with pytest.raises(ValueError):
            sg.gen_rings(100, stage, 0)


class TestClusters:
    def test_single_cluster_is_base(self):
        base = np.random.default_rng(4).standard_normal((300, 2))
        np.testing.assert_array_equal(sg.gen_clusters(300, 1, 4).data, base)

    def test_four_centroids(self):
        n = 2000
        x = sg.gen_clusters(n, 4, 5).data
        tol = 4 / math.sqrt(n / 4)
        expected = [(10, 0), (0, 10), (-10, 0), (0, -10)]
        for block, centre in zip(np.array_split(np.arange(n), 4), expected):
            assert np.all(np.abs(x[block].mean(axis=0) - centre) <= tol)

    def test_base_shared_across_c(self):
        base = sg.gen_clusters(120, 1, 6).data
        for c in (2, 7, 12):
            x = sg.gen_clusters(120, c, 6).data
            shifts = x - base
            for block in np.array_split(np.arange(120), c):
                np.testing.assert_allclose(np.hypot(*shifts[block].T), 10.0, rtol=1e-12)

    def test_group_sizes(self):
        sizes = [len(b) for b in np.array_split(np.arange(301), 12)]
        assert set(sizes) <= {301 // 12, -(-301 // 12)}

    @pytest.mark.parametrize("n, c", [(10, 0), (10, 13), (3, 4)])
    def test_invalid(self, n, c):
        with pytest.raises(ValueError):
            sg.gen_clusters(n, c, 0)
