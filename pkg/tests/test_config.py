import pytest

from oneside import config as cf


class TestParse:
    def test_comments_and_whitespace(self):
        cfg = cf.parse_text("# header\n a = 1 \nb=two # trailing\n\n")
        assert cfg == {"a": "1", "b": "two"}

    def test_all_problems_reported(self):
        with pytest.raises(cf.ConfigError) as info:
            cf.parse_text("a = 1\nnonsense\na = 2\n = 3\n")
        assert len(info.value.problems) == 3

    def test_echo_is_sorted(self):
        assert cf.echo({"b": "2", "a": "1"}) == "a = 1\nb = 2\n"


class TestReader:
    def test_typed_getters(self):
        r = cf.Reader(cf.parse_text("n = 4\nx = 2.5\nxs = 1, 2 3\nflag = yes\nname = q"))
        assert r.int("n") == 4
        assert r.float("x") == 2.5
        assert r.floats("xs") == (1.0, 2.0, 3.0)
        assert r.bool("flag") is True
        assert r.str("name", choices={"q", "r"}) == "q"
        assert r.float("missing", 7.0) == 7.0
        r.check()

    def test_errors_accumulate(self):
        r = cf.Reader(cf.parse_text("n = four\nname = z"))
        r.int("n")
        r.str("name", choices={"q"})
        r.str("flux", required=True)
        with pytest.raises(cf.ConfigError) as info:
            r.check()
        msgs = info.value.problems
        assert len(msgs) == 3
        assert any("missing required key 'flux'" in m for m in msgs)


def test_solver_config_from_keys():
    cfg = cf.parse_text("grid.n = 100\ngrid.radius = 3\neps_list = 0.1 0.01\nt_out = 0.5 1")
    sc = cf.solver_config(cfg)
    assert sc.n == 100 and sc.radius == 3.0
    assert sc.eps_list == (0.1, 0.01) and sc.t_out == (0.5, 1.0)


def test_solver_config_bad_value():
    with pytest.raises(cf.ConfigError):
        cf.solver_config(cf.parse_text("grid.n = lots"))
