import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import beta

from oneside import fundamental as fs
from oneside.flux import burgers, cubic, quartic
from oneside.grid import make_uniform_grid, mass_of


def barenblatt_mass_beta(gamma, C):
    """Mass of (C - k x^2)_+^p (or (C + |k| x^2)^p) through the Beta function."""
    k = (gamma - 1) / (2 * gamma * (gamma + 1))
    p = 1.0 / (gamma - 1)
    if gamma > 1:
        return C ** (p + 0.5) * k ** -0.5 * beta(0.5, p + 1)
    return C ** (p + 0.5) * abs(k) ** -0.5 * beta(0.5, -p - 0.5)


class TestNWave:
    @pytest.mark.parametrize("m,t", [(0.5, 1.0), (1.0, 1.0), (2.0, 0.5), (4.0, 3.0)])
    def test_burgers_edge(self, m, t):
        assert fs.nwave_support_edge(burgers(), m, t) == pytest.approx(math.sqrt(2 * m * t), rel=1e-12)

    @pytest.mark.parametrize("m,t", [(1.0, 1.0), (2.0, 0.25)])
    def test_cubic_edge(self, m, t):
        # int_0^a sqrt(x / t) dx = (2/3) a^(3/2) / sqrt(t)
        expected = (1.5 * m * math.sqrt(t)) ** (2.0 / 3.0)
        assert fs.nwave_support_edge(cubic(), m, t) == pytest.approx(expected, rel=1e-12)

    def test_profile_is_the_fan(self):
        g = make_uniform_grid(-1, 3, 4000)
        fr = fs.nwave(burgers(), 1.0, 1.0, g)
        a = math.sqrt(2.0)
        inside = (g.nodes > 0) & (g.nodes < a)
        np.testing.assert_allclose(fr.values[inside], g.nodes[inside], rtol=1e-12)
        assert np.all(fr.values[~inside] == 0)

    def test_grid_mass(self):
        g = make_uniform_grid(-1, 3, 40000)
        assert mass_of(fs.nwave(burgers(), 1.0, 1.0, g)) == pytest.approx(1.0, abs=2e-4)

    def test_domain_too_small(self):
        with pytest.raises(fs.DomainTooSmall):
            fs.nwave(burgers(), 8.0, 1.0, make_uniform_grid(-1, 2, 100))

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_invalid_mass(self, bad):
        with pytest.raises(ValueError):
            fs.nwave_support_edge(burgers(), bad, 1.0)

    def test_background_is_a_galilean_shift(self):
        g = make_uniform_grid(-2, 6, 3200)
        c, t = 0.5, 2.0
        fr = fs.burgers_background_nwave(1.0, c, t, g)
        base = fs.nwave(burgers(), 1.0, t, g, x0=c * t)
        np.testing.assert_allclose(fr.values, base.values + c, atol=1e-12)

    @given(st.floats(0.1, 8.0), st.floats(0.2, 4.0))
    def test_burgers_self_similarity(self, m, t):
        a1 = fs.nwave_support_edge(burgers(), 1.0, t)
        am = fs.nwave_support_edge(burgers(), m, m * t)
        assert am == pytest.approx(m * a1, rel=1e-10)


class TestBarenblatt:
    @pytest.mark.parametrize("gamma", [0.3, 0.5, 0.8, 1.5, 2.0, 3.0])
    @pytest.mark.parametrize("C", [0.5, 1.0, 2.0])
    def test_mass_against_beta_function(self, gamma, C):
        assert fs.barenblatt_mass(gamma, C) == pytest.approx(barenblatt_mass_beta(gamma, C), rel=1e-9)

    @pytest.mark.parametrize("gamma", [0.5, 2.0])
    def test_constant_inverts_mass(self, gamma):
        C = fs.barenblatt_constant(gamma, 1.7)
        assert barenblatt_mass_beta(gamma, C) == pytest.approx(1.7, rel=1e-10)

    def test_gamma_two_closed_form(self):
        # gamma = 2: u = (C t^(-1/3) - x^2 / (12 t))_+, mass (4/3) sqrt(12) C^(3/2)
        C = fs.barenblatt_constant(2.0, 1.0)
        assert (4.0 / 3.0) * math.sqrt(12.0) * C ** 1.5 == pytest.approx(1.0, rel=1e-12)
        R = fs.barenblatt_support_radius(2.0, 1.0, 1.0)
        assert R == pytest.approx(math.sqrt(12 * C), rel=1e-12)

    @pytest.mark.parametrize("gamma", [0.5, 2.0, 3.0])
    def test_solves_the_equation(self, gamma):
        # residual of u_t = (u^gamma)_xx by central differences away from the front
        C = fs.barenblatt_constant(gamma, 1.0)
        x = np.linspace(-0.5, 0.5, 11)
        t, h, k = 1.0, 1e-3, 1e-4
        u = lambda x, t: fs.barenblatt_eval(gamma, C, x, t)
        ut = (u(x, t + k) - u(x, t - k)) / (2 * k)
        w = lambda x: u(x, t) ** gamma
        lap = (w(x + h) - 2 * w(x) + w(x - h)) / h ** 2
        np.testing.assert_allclose(ut, lap, rtol=2e-4, atol=2e-6)

    def test_fast_diffusion_domain_check(self):
        with pytest.raises(fs.DomainTooSmall):
            fs.barenblatt(0.5, 1.0, 1.0, make_uniform_grid(-2, 2, 200))
        fr = fs.barenblatt(0.5, 1.0, 1.0, make_uniform_grid(-2, 2, 200), tail_tol=None)
        assert np.all(fr.values > 0)

    @pytest.mark.parametrize("gamma", [1.0, 0.0, -1.0])
    def test_gamma_validation(self, gamma):
        with pytest.raises(ValueError):
            fs.barenblatt_mass(gamma, 1.0)


class TestHeatKernel:
    @pytest.mark.parametrize("n_dim", [1, 2, 3])
    def test_mass_and_peak(self, n_dim):
        t = 0.7
        assert fs.heat_kernel(2.0, t, n_dim, np.zeros(n_dim)) == pytest.approx(
            2.0 * (4 * math.pi * t) ** (-n_dim / 2))

    def test_one_d_mass(self):
        g = make_uniform_grid(-20, 20, 8000)
        assert mass_of(fs.heat_frame(3.0, 1.5, g)) == pytest.approx(3.0, rel=1e-10)

    def test_solves_heat_equation(self):
        x = np.linspace(-3, 3, 13)
        t, h, k = 1.0, 1e-3, 1e-5
        u = lambda x, t: fs.heat_kernel(1.0, t, 1, x)
        ut = (u(x, t + k) - u(x, t - k)) / (2 * k)
        uxx = (u(x + h, t) - 2 * u(x, t) + u(x - h, t)) / h ** 2
        np.testing.assert_allclose(ut, uxx, atol=1e-6)

    def test_shape_check(self):
        with pytest.raises(ValueError):
            fs.heat_kernel(1.0, 1.0, 2, np.zeros(3))


class TestFundamentalSolution:
    @pytest.mark.parametrize("kind,params", [("nwave", {"flux": burgers()}),
                                             ("barenblatt", {"gamma": 2.0}),
                                             ("heat_kernel", {})])
    def test_sample_has_mass(self, kind, params):
        g = make_uniform_grid(-10, 10, 20000)
        fr = fs.FundamentalSolution(kind, 1.5, params=params).sample(g, 1.0)
        assert mass_of(fr) == pytest.approx(1.5, abs=2e-3)

    def test_similarity_of_closed_forms(self):
        g = make_uniform_grid(-2, 4, 600)
        prov = lambda m, t, grid: fs.nwave(burgers(), m, t, grid)
        assert fs.similarity_check(prov, 2.0, 1.0, g) < 1e-12


class TestEntropyFundamental:
    def test_burgers_matches_nwave_with_background(self):
        g = make_uniform_grid(-2, 6, 4000)
        for c in (0.0, 0.3):
            E = fs.EntropyFundamental(burgers(), c)
            fr = E.frame(1.0, 1.0, g)
            ref = fs.burgers_background_nwave(1.0, c, 1.0, g)
            assert np.max(np.abs(fr.values - ref.values)) < 1e-9

    @pytest.mark.parametrize("m,c", [(1.0, 0.0), (4.0, 0.4), (8.0, 0.0), (16.0, 0.36)])
    def test_quartic_mass_is_conserved(self, m, c):
        g = make_uniform_grid(-4, 10, 56000)
        E = fs.EntropyFundamental(quartic(), c)
        fr = E.frame(m, 1.0, g)
        assert mass_of(fr - c) == pytest.approx(m, rel=2e-3)

    @pytest.mark.parametrize("m,split", [(0.5, True), (4.0, True), (8.0, False), (16.0, False)])
    def test_quartic_front_split(self, m, split):
        # the single jump (M, 0) stays admissible only while M >= M* = 8/3
        E = fs.EntropyFundamental(quartic(), 0.0)
        assert E.m_star == pytest.approx(8.0 / 3.0, rel=1e-8)
        st = E.structure(m, 1.0)
        assert st["split"] is split
        assert (st["M"] < E.m_star) is split

    def test_tiny_mass_outside_coverage(self):
        E = fs.EntropyFundamental(quartic(), 0.0)
        with pytest.raises(fs.FrontStructureError):
            E.structure(0.05, 1.0)

    def test_negative_background_rejected(self):
        with pytest.raises(ValueError):
            fs.EntropyFundamental(quartic(), -0.1)
