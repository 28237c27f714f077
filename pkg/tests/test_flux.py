import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oneside.flux import (FLUXES, buckley_leverett, burgers, chord_admissible, chord_speed,
                          concave_envelope, convex_envelope, cubic, flux_from_table,
                          get_flux, is_convex_on, quartic, rarefaction_profile,
                          shocks_of_envelope)


@pytest.mark.parametrize("name", sorted(FLUXES))
def test_normalisation_and_derivative(name):
    f = get_flux(name)
    assert float(f(0.0)) == pytest.approx(0.0, abs=1e-14)
    assert float(f.deriv(0.0)) == pytest.approx(0.0, abs=1e-14)
    assert f.derivative_error(0.0, 1.0) < 1e-6


def test_unknown_flux():
    with pytest.raises((KeyError, ValueError)):
        get_flux("nope")


class TestRarefaction:
    def test_burgers_is_identity(self):
        y = np.linspace(0, 3, 31)
        np.testing.assert_allclose(rarefaction_profile(burgers(), y), y, atol=1e-14)

    def test_cubic_is_square_root(self):
        y = np.linspace(0, 4, 17)
        np.testing.assert_allclose(rarefaction_profile(cubic(), y), np.sqrt(y), atol=1e-13)

    def test_non_monotone_derivative_rejected(self):
        with pytest.raises(ValueError):
            rarefaction_profile(quartic(), 0.5, 0.0, 3.0)

    def test_below_range(self):
        with pytest.raises(ValueError):
            rarefaction_profile(burgers(), -1.0)


class TestEnvelopes:
    def test_convex_flux_is_its_own_envelope(self):
        env = convex_envelope(burgers(), 0.0, 2.0)
        assert env.linear_segments() == []
        u = np.linspace(0, 2, 9)
        np.testing.assert_allclose(env(u), burgers()(u))

    def test_buckley_leverett_tangent_chords(self):
        # f(u) = u^2 / (u^2 + (1 - u)^2): the tangent from the origin touches
        # at 1/sqrt(2) and, by the symmetry f(1 - u) = 1 - f(u), the convex
        # hull chord into u = 1 touches at 1 - 1/sqrt(2)
        f = buckley_leverett()
        r = 1 / np.sqrt(2)
        (lo,) = convex_envelope(f, 0.0, 1.0).linear_segments()
        assert (lo.u_lo, lo.u_hi) == pytest.approx((1 - r, 1.0), abs=1e-7)
        (up,) = concave_envelope(f, 0.0, 1.0).linear_segments()
        assert (up.u_lo, up.u_hi) == pytest.approx((0.0, r), abs=1e-7)

    def test_quartic_envelope_is_below_and_convex(self):
        f = quartic()
        env = convex_envelope(f, 0.0, 3.0)
        u = np.linspace(0, 3, 3001)
        e = env(u)
        assert np.all(e <= f(u) + 1e-9)
        assert np.all(np.diff(e, 2) >= -1e-9)

    def test_concave_envelope_above(self):
        f = quartic()
        env = concave_envelope(f, 0.0, 2.5)
        u = np.linspace(0, 2.5, 2501)
        assert np.all(env(u) >= f(u) - 1e-9)

    def test_shocks_of_envelope_directions(self):
        f = quartic()
        for s in shocks_of_envelope(convex_envelope(f, 0.0, 3.0)):
            assert s.u_left < s.u_right
        for s in shocks_of_envelope(concave_envelope(f, 0.0, 2.5)):
            assert s.u_left > s.u_right

    def test_degenerate_interval(self):
        with pytest.raises(ValueError):
            convex_envelope(burgers(), 1.0, 1.0)

    def test_envelope_csv_header(self):
        text = convex_envelope(buckley_leverett(), 0.0, 1.0).to_csv()
        assert text.splitlines()[0] == "u_lo,u_hi,shape,value_lo,value_hi"


class TestChord:
    def test_speed(self):
        assert chord_speed(burgers(), 1.0, 3.0) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            chord_speed(burgers(), 1.0, 1.0)

    @given(st.floats(0.0, 5.0), st.floats(0.0, 5.0))
    def test_convex_flux_admits_exactly_decreasing_jumps(self, a, b):
        if abs(a - b) < 1e-3:
            return
        assert chord_admissible(burgers(), a, b) == (a > b)

    @pytest.mark.parametrize("ul,ur,expected", [
        (2.675, 0.0, True), (2.675, 0.4, False), (2.9, 0.4, True), (2.9, 2.675, True)])
    def test_quartic_jumps(self, ul, ur, expected):
        assert chord_admissible(quartic(), ul, ur) is expected


def test_is_convex_on():
    assert is_convex_on(burgers(), -2, 2)
    assert not is_convex_on(quartic(), 0, 3)


def test_table_flux_reproduces_quadratic():
    u = np.linspace(0, 2, 201)
    f = flux_from_table(u, 0.5 * u * u)
    probe = np.linspace(0.1, 1.9, 7)
    np.testing.assert_allclose(f(probe), 0.5 * probe ** 2, atol=1e-10)
    np.testing.assert_allclose(f.deriv(probe), probe, atol=1e-8)
