import pytest

from oneside import families as fam
from oneside import inequalities as iq


@pytest.fixture(scope="module")
def convex_members():
    return fam.convex_family()


class TestConvexFamily:
    def test_size_and_seed(self, convex_members):
        assert len(convex_members) == 50
        again = fam.convex_family()
        assert [m.name for m in again] == [m.name for m in convex_members]

    def test_ratios_are_off_the_fence(self, convex_members):
        for m in convex_members:
            if m.ratio != 1.0:
                assert abs(m.ratio - 1.0) >= 0.05

    @pytest.mark.parametrize("t", [0.5, 2.0])
    def test_oleinik_sup_matches_ratio(self, convex_members, t):
        g = fam.convex_grid()
        for m in convex_members[:12]:
            if not m.ratio < float("inf"):
                continue          # jump members have an unbounded quotient
            u = m.build(t, g)
            sup = iq.oleinik_sup(u, m.flux, t)
            assert sup * t == pytest.approx(m.ratio, rel=2e-2), m.name
            assert iq.oleinik_verdict(u, m.flux, t).holds == m.expected_holds


class TestPMEFamily:
    @pytest.mark.parametrize("gamma", [0.5, 2.0])
    def test_verdicts_follow_ratio(self, gamma):
        g = fam.pme_grid(gamma)
        for m in fam.pme_family(gamma, size=8):
            u = m.build(1.0, g)
            assert iq.ab_verdict(u, gamma, 1.0).holds == m.expected_holds, m.name


class TestNonconvex:
    def test_counterexample_speed(self):
        s = fam.counterexample()
        f = s.flux
        assert s.speed == pytest.approx((float(f(2.675)) - float(f(0.4))) / 2.275)

    def test_family_labels(self):
        names = [n for n, _, _ in fam.nonconvex_family()]
        assert names[0] == "step-2.675-0.4"
        assert len(names) == 6
