import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erf

from oneside import heat_nd as hn
from oneside.fundamental import DomainTooSmall


def gaussian_nd(axes, m, t, centre):
    g = hn.GridFunctionND(axes, np.zeros(tuple(a.n + 1 for a in axes)))
    r2 = np.sum((g.mesh() - np.asarray(centre)) ** 2, axis=-1)
    return g.with_values(m * (4 * math.pi * t) ** (-len(axes) / 2) * np.exp(-r2 / (4 * t)), t=0.0)


class TestConvolution:
    @pytest.mark.parametrize("n_dim,n", [(1, 400), (2, 160), (3, 48)])
    def test_gaussian_semigroup(self, n_dim, n):
        axes = hn.make_grid_nd(n_dim, -12.0, 12.0, n)
        centre = [0.5, -0.3, 0.2][:n_dim]
        u0 = gaussian_nd(axes, 2.0, 0.5, centre)
        u = hn.heat_convolve(u0, 1.0)
        exact = gaussian_nd(axes, 2.0, 1.5, centre)
        assert np.max(np.abs(u.values - exact.values)) < 1e-10
        assert u.t == 1.0

    def test_box_against_erf_product(self):
        axes = hn.make_grid_nd(2, -8.0, 8.0, 320)
        g = hn.GridFunctionND(axes, np.zeros((321, 321)))
        X = g.mesh()
        a, t = 1.0, 0.5
        u0 = g.with_values(np.all(np.abs(X) <= a, axis=-1).astype(float), t=0.0)
        u = hn.heat_convolve(u0, t)
        s = 2 * math.sqrt(t)
        one = lambda x: 0.5 * (erf((a - x) / s) + erf((a + x) / s))
        exact = one(X[..., 0]) * one(X[..., 1])
        dx = axes[0].dx
        assert np.max(np.abs(u.values - exact)) < 2 * dx

    def test_mass_conserved(self):
        axes = hn.make_grid_nd(2, -12.0, 12.0, 192)
        u0 = hn.random_initial_data(axes, 3)
        assert hn.heat_convolve(u0, 1.0).mass() == pytest.approx(u0.mass(), rel=1e-9)

    def test_split_time(self):
        axes = hn.make_grid_nd(2, -14.0, 14.0, 140)
        u0 = hn.random_initial_data(axes, 5)
        one = hn.heat_convolve(u0, 0.6)
        two = hn.heat_convolve(hn.heat_convolve(u0, 0.2, edge_tol=1.0), 0.4, edge_tol=1.0)
        assert np.max(np.abs(one.values - two.values)) < 1e-9 * np.max(one.values)

    def test_transpose_commutes(self):
        axes = hn.make_grid_nd(2, -8.0, 8.0, 96)
        u0 = hn.random_initial_data(axes, 9)
        a = hn.heat_convolve(u0, 0.7).values
        b = hn.heat_convolve(u0.with_values(u0.values.T), 0.7).values
        np.testing.assert_allclose(a.T, b, atol=1e-14)

    def test_eval_points_match_grid(self):
        axes = hn.make_grid_nd(2, -8.0, 8.0, 64)
        u0 = hn.random_initial_data(axes, 2)
        u = hn.heat_convolve(u0, 0.3)
        pts = np.array([[axes[0].nodes[10], axes[1].nodes[40]], [0.0, 0.0]])
        vals = hn.heat_eval_points(u0, 0.3, pts)
        assert vals[0] == pytest.approx(u.values[10, 40], rel=1e-12)
        assert vals[1] == pytest.approx(u.values[32, 32], rel=1e-12)

    def test_boundary_data_rejected(self):
        axes = hn.make_grid_nd(2, -1.0, 1.0, 20)
        u0 = hn.GridFunctionND(axes, np.ones((21, 21)))
        with pytest.raises(DomainTooSmall):
            hn.heat_convolve(u0, 1.0)

    def test_negative_data_rejected(self):
        axes = hn.make_grid_nd(1, -1.0, 1.0, 20)
        with pytest.raises(ValueError):
            hn.heat_convolve(hn.GridFunctionND(axes, -np.ones(21)), 1.0)


class TestPsiConvexity:
    def setup_method(self):
        self.axes = hn.make_grid_nd(2, -8.0, 8.0, 160)

    def test_kernel_ratio_is_constant(self):
        rho = hn.fundamental_nd(self.axes, 2.0, (0.5, 0.0), 1.0)
        u = hn.GridFunctionND(self.axes, 3.0 * rho)
        psi = hn.psi_field(u, 2.0, (0.5, 0.0), 1.0)
        np.testing.assert_allclose(psi.field.values, 3.0, rtol=1e-12)
        assert hn.convexity_check(psi).holds

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_data_convex(self, seed):
        u = hn.heat_convolve(hn.random_initial_data(self.axes, seed), 1.0)
        v = hn.convexity_check(hn.psi_field(u, u.mass(), (0.0, 0.0), 1.0), seed=seed)
        assert v.holds and v.n_violations == 0

    def test_dimple_is_detected(self):
        u = hn.heat_convolve(hn.random_initial_data(self.axes, 0), 1.0)
        psi = hn.psi_field(u, u.mass(), (0.0, 0.0), 1.0)
        v = hn.convexity_check(hn.inject_dimple(psi, (0.3, -0.2)))
        assert not v.holds
        assert math.dist(v.extremal_location, (0.3, -0.2)) < 0.5

    def test_three_dimensions(self):
        axes = hn.make_grid_nd(3, -8.0, 8.0, 40)
        u = hn.heat_convolve(hn.random_initial_data(axes, 4), 1.0)
        assert hn.convexity_check(hn.psi_field(u, 1.0, (0, 0, 0), 1.0), n_lines=32).holds

    def test_underflow_guard(self):
        axes = hn.make_grid_nd(1, -200.0, 200.0, 100)
        u = hn.GridFunctionND(axes, np.ones(101))
        with pytest.raises(DomainTooSmall):
            hn.psi_field(u, 1.0, 0.0, 0.01)

    @pytest.mark.parametrize("n_dim,step,count", [(1, 3, 1), (2, 1, 4), (3, 1, 13)])
    def test_lattice_directions(self, n_dim, step, count):
        dirs = hn.lattice_directions(n_dim, step)
        assert len(dirs) == count
        assert all(math.gcd(*map(abs, d)) == 1 for d in dirs)

    @given(st.integers(0, 10_000))
    def test_convex_quadratic_passes_any_lines(self, seed):
        g = hn.GridFunctionND(self.axes, np.zeros((161, 161)))
        X = g.mesh()
        q = g.with_values(1.0 + X[..., 0] ** 2 + 0.5 * X[..., 0] * X[..., 1] + X[..., 1] ** 2)
        assert hn.convexity_check(q, n_lines=16, seed=seed).holds


class TestLevelSets:
    def setup_method(self):
        self.axes = hn.make_grid_nd(2, -8.0, 8.0, 128)

    def test_zero_data_gives_whole_positive_set(self):
        u = hn.GridFunctionND(self.axes, np.zeros((129, 129)))
        assert hn.levelset_convexity(u, 1.0, (0, 0), 1.0).holds

    @pytest.mark.parametrize("m", [0.1, 1.0, 5.0])
    def test_two_bumps(self, m):
        u = hn.heat_convolve(hn.two_bumps(self.axes), 1.0)
        assert hn.levelset_convexity(u, m, (0.0, 0.0), 1.0).holds

    def test_lshape_control_fails(self):
        u = hn.lshape_control(self.axes, 1.0, 1.0)
        v = hn.levelset_convexity(u, 1.0, (0.0, 0.0), 1.0)
        assert not v.holds and v.n_violations > 0

    def test_three_d_rejected(self):
        axes = hn.make_grid_nd(3, -1.0, 1.0, 4)
        with pytest.raises(ValueError):
            hn.levelset_convexity(hn.GridFunctionND(axes, np.zeros((5, 5, 5))), 1.0, (0, 0, 0), 1.0)


class TestGridFunctionND:
    @pytest.mark.parametrize("n_dim", [1, 2, 3])
    def test_csv_round_trip(self, n_dim, tmp_path):
        axes = hn.make_grid_nd(n_dim, -2.0, 2.0, 6)
        u = hn.random_initial_data(axes, 1, box=1.5)
        path = tmp_path / "u.csv"
        u.to_csv(path)
        back = hn.GridFunctionND.from_csv(path)
        np.testing.assert_array_equal(back.values, u.values)
        assert back.t == u.t
        assert back.axes == u.axes

    def test_shape_checked(self):
        axes = hn.make_grid_nd(2, -1.0, 1.0, 4)
        with pytest.raises(ValueError):
            hn.GridFunctionND(axes, np.zeros((5, 4)))
