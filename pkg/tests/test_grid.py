import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oneside.grid import (Grid1D, GridFunction1D, approximate_delta, check_mass, l1_distance,
                          make_uniform_grid, mass_of, support_length, support_of,
                          total_variation)


class TestGrid1D:
    def test_nodes_and_spacing(self):
        g = make_uniform_grid(-1.0, 3.0, 400)
        assert g.dx == pytest.approx(0.01)
        assert g.nodes.shape == (401,)
        assert g.nodes[0] == -1.0 and g.nodes[-1] == pytest.approx(3.0)

    @pytest.mark.parametrize("lo,hi,n", [(1.0, 1.0, 10), (2.0, 1.0, 10), (0.0, 1.0, 1),
                                         (0.0, math.inf, 10)])
    def test_rejects_bad_grids(self, lo, hi, n):
        with pytest.raises(ValueError):
            Grid1D(lo, hi, n)

    def test_index_of_clips(self):
        g = make_uniform_grid(0.0, 1.0, 10)
        assert g.index_of(0.31) == 3
        assert g.index_of(-5.0) == 0
        assert g.index_of(5.0) == 10


class TestGridFunction:
    def test_values_are_read_only(self, grid):
        u = GridFunction1D(grid, np.zeros(grid.n + 1))
        with pytest.raises(ValueError):
            u.values[0] = 1.0

    def test_shape_and_finiteness_checked(self, grid):
        with pytest.raises(ValueError):
            GridFunction1D(grid, np.zeros(grid.n))
        bad = np.zeros(grid.n + 1)
        bad[3] = np.nan
        with pytest.raises(ValueError):
            GridFunction1D(grid, bad)

    def test_arithmetic_needs_same_grid(self, grid):
        u = GridFunction1D(grid, np.ones(grid.n + 1))
        other = GridFunction1D(make_uniform_grid(0, 1, 10), np.ones(11))
        with pytest.raises(ValueError):
            u - other
        assert np.all((u - u).values == 0)
        assert np.all((u + 2.0).values == 3.0)

    def test_csv_round_trip(self, grid, tmp_path):
        u = GridFunction1D(grid, np.sin(grid.nodes), t=0.75)
        path = tmp_path / "u.csv"
        u.to_csv(path)
        back = GridFunction1D.from_csv(path)
        assert back.grid == grid
        assert back.t == 0.75
        np.testing.assert_array_equal(back.values, u.values)

    def test_csv_rejects_nonuniform(self):
        text = "x,value,t\n0,0,1\n1,0,1\n3,0,1\n"
        with pytest.raises(ValueError, match="uniform"):
            GridFunction1D.from_csv(text)


class TestIntegrals:
    def test_trapezoid_exact_for_linear(self):
        g = make_uniform_grid(0.0, 2.0, 7)
        u = GridFunction1D(g, 3.0 * g.nodes + 1.0)
        assert mass_of(u) == pytest.approx(8.0, rel=1e-14)

    def test_l1_distance(self):
        g = make_uniform_grid(0.0, 1.0, 100)
        u = GridFunction1D(g, np.zeros(101))
        v = GridFunction1D(g, np.full(101, 2.0))
        assert l1_distance(u, v) == pytest.approx(2.0)

    def test_total_variation_of_hat(self):
        g = make_uniform_grid(-1.0, 1.0, 200)
        u = GridFunction1D(g, np.maximum(0.0, 1 - np.abs(g.nodes)))
        assert total_variation(u) == pytest.approx(2.0)
        assert total_variation(u, lo=0.0) == pytest.approx(1.0)

    def test_support(self):
        g = make_uniform_grid(0.0, 10.0, 10)
        v = np.zeros(11)
        v[3:6] = 1.0
        u = GridFunction1D(g, v)
        assert support_of(u) == (3.0, 5.0)
        assert support_length(u) == 2.0
        assert support_of(u.with_values(np.zeros(11))) is None

    @pytest.mark.parametrize("shape", ["triangle", "ramp"])
    def test_delta_has_exact_mass(self, grid, shape):
        d = approximate_delta(2.5, 0.3, 0.1, grid, shape)
        assert mass_of(d) == pytest.approx(2.5, rel=1e-13)
        assert d.is_nonnegative()

    def test_delta_ramp_vanishes_left_of_centre(self, grid):
        d = approximate_delta(1.0, 0.0, 0.1, grid, "ramp")
        assert np.all(d.values[grid.nodes < 0] == 0)

    def test_delta_too_narrow(self, grid):
        with pytest.raises(ValueError):
            approximate_delta(1.0, 0.0, grid.dx, grid)

    @pytest.mark.parametrize("m", [0.0, -1.0, math.nan, math.inf])
    def test_check_mass(self, m):
        with pytest.raises(ValueError):
            check_mass(m)


@given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=60),
       st.floats(-10, 10))
def test_total_variation_shift_invariant(vals, c):
    g = make_uniform_grid(0.0, 1.0, len(vals) - 1)
    u = GridFunction1D(g, vals)
    assert total_variation(u + c) == pytest.approx(total_variation(u), rel=1e-9, abs=1e-6)


@given(st.lists(st.floats(0, 100), min_size=3, max_size=60))
def test_mass_is_monotone_in_data(vals):
    g = make_uniform_grid(0.0, 1.0, len(vals) - 1)
    u = GridFunction1D(g, vals)
    assert mass_of(u) >= 0
    assert mass_of(u + 1.0) >= mass_of(u)
