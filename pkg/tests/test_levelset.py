import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oneside.flux import burgers
from oneside.fundamental import nwave
from oneside.grid import GridFunction1D, make_uniform_grid
from oneside.levelset import (SignPattern, default_tol, is_connectable, monotonicity_changes,
                              sign_change_count, sign_pattern, steepness_classify)

patterns = st.text(alphabet="+-0", min_size=0, max_size=40)


def brute_connectable(text):
    """Reference: look for any + - + subsequence by triple loop."""
    idx = [c for c in text if c != "0"]
    n = len(idx)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                if idx[i] == "+" and idx[j] == "-" and idx[k] == "+":
                    return False
    return True


class TestConnectability:
    @pytest.mark.parametrize("text,expected", [
        ("", True), ("+", True), ("0+0", True), ("+++", True), ("-+-", True),
        ("++00--", True), ("--++0+--", True), ("+-+", False), ("+0-0+", False),
        ("-+--0++", False), ("+-", True), ("-+", True)])
    def test_examples(self, text, expected):
        assert is_connectable(SignPattern.from_string(text)).connectable is expected

    def test_witness_positions(self):
        rep = is_connectable(SignPattern.from_string("0+0-0+"))
        assert rep.witness == (1.0, 3.0, 5.0)
        assert rep.plus_components == 2

    @given(patterns)
    def test_matches_brute_force(self, text):
        assert is_connectable(SignPattern.from_string(text)).connectable == brute_connectable(text)

    @given(patterns, st.integers(0, 40), st.integers(1, 5))
    def test_zero_insertion_invariant(self, text, pos, k):
        pos = min(pos, len(text))
        padded = text[:pos] + "0" * k + text[pos:]
        a = is_connectable(SignPattern.from_string(text)).connectable
        b = is_connectable(SignPattern.from_string(padded)).connectable
        assert a == b

    @given(patterns)
    def test_repeating_a_symbol_is_invariant(self, text):
        doubled = "".join(c * 2 for c in text)
        assert (is_connectable(SignPattern.from_string(text)).connectable ==
                is_connectable(SignPattern.from_string(doubled)).connectable)

    @given(patterns)
    def test_reversal_is_invariant(self, text):
        assert (is_connectable(SignPattern.from_string(text)).connectable ==
                is_connectable(SignPattern.from_string(text[::-1])).connectable)

    @given(patterns)
    def test_at_most_one_plus_run_after_zero_deletion(self, text):
        red = text.replace("0", "")
        runs = len([r for r in red.split("-") if r])
        assert is_connectable(SignPattern.from_string(text)).connectable == (runs <= 1)


class TestSignPattern:
    def test_thresholds(self):
        g = make_uniform_grid(0, 1, 4)
        e = GridFunction1D(g, [1.0, 0.05, -0.05, -1.0, 0.2])
        assert str(sign_pattern(e, 0.1)) == "+00-+"
        assert sign_change_count(sign_pattern(e, 0.1)) == 2

    def test_tol_must_be_positive(self):
        g = make_uniform_grid(0, 1, 4)
        with pytest.raises(ValueError):
            sign_pattern(GridFunction1D(g, np.zeros(5)), 0.0)

    def test_default_tol_zero_function(self):
        g = make_uniform_grid(0, 1, 4)
        assert default_tol(GridFunction1D(g, np.zeros(5))) > 0


class TestMonotonicity:
    @pytest.mark.parametrize("vals,expected", [
        ([0, 1, 2, 3], 0), ([0, 1, 0], 1), ([0, 1, 0, 1, 0], 3), ([0, 1, 1, 1, 0], 1),
        ([2, 2, 2], 0)])
    def test_examples(self, vals, expected):
        assert monotonicity_changes(np.array(vals, float)) == expected

    def test_nwave_has_one_change(self):
        g = make_uniform_grid(-2, 4, 3000)
        assert monotonicity_changes(nwave(burgers(), 1.0, 1.0, g)) == 1

    @given(st.lists(st.floats(-100, 100), min_size=2, max_size=50))
    def test_bounded_by_length(self, vals):
        assert 0 <= monotonicity_changes(np.array(vals)) <= max(0, len(vals) - 2)


class TestSteepness:
    def setup_method(self):
        self.g = make_uniform_grid(-3, 6, 1800)

    def test_nwaves_of_different_mass(self):
        a = nwave(burgers(), 1.0, 1.0, self.g)
        b = nwave(burgers(), 2.0, 1.0, self.g)
        rep = steepness_classify(a, b)
        assert rep.violations == []

    def test_identical_profiles_have_no_transversal_crossing(self):
        a = nwave(burgers(), 1.0, 1.0, self.g)
        assert steepness_classify(a, a).violations == []

    def test_too_steep_profile_flagged(self):
        from oneside.criteria import too_steep_control
        u, rho = too_steep_control(1.0)
        rep = steepness_classify(u, rho, 1.0)
        assert rep.violations
