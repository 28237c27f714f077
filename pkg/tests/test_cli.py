import numpy as np
import pytest

from oneside import runner
from oneside.cli import main
from oneside.grid import GridFunction1D

SMALL_COUNTEREXAMPLE = """\
scenario.name = ce_small
scenario.kind = counterexample
flux = quartic
grid.n = 8000
sweep.m_values = 2 8
"""


@pytest.fixture
def ce_cfg(tmp_path):
    p = tmp_path / "ce.cfg"
    p.write_text(SMALL_COUNTEREXAMPLE)
    return p


class TestRun:
    def test_counterexample_exit_code_and_witness(self, ce_cfg, run_root, capsys):
        assert main(["run", str(ce_cfg)]) == 2
        out = capsys.readouterr().out
        assert "background witness m=6.4676" in out
        assert "c=0.36" in out
        rep = (run_root / "ce_small" / "report.txt").read_text()
        assert "exit_code = 2" in rep
        assert "verdict.zero_background_sweep = holds" in rep

    def test_csv_outputs_are_deterministic(self, ce_cfg, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        runner.run_scenario(ce_cfg, a)
        runner.run_scenario(ce_cfg, b)
        files = sorted(p.relative_to(a / "ce_small") for p in (a / "ce_small").rglob("*.csv"))
        assert files
        for rel in files:
            assert (a / "ce_small" / rel).read_bytes() == (b / "ce_small" / rel).read_bytes()

    def test_holding_scenario_exits_zero(self, tmp_path, run_root):
        p = tmp_path / "eq.cfg"
        p.write_text("scenario.name = eq\nscenario.kind = oleinik_equivalence\n"
                     "scenario.seed = 7\nflux = burgers\ntimes = 1.0\nfamily.size = 12\n")
        assert main(["run", str(p)]) == 0

    def test_missing_key_exits_one(self, tmp_path, run_root, capsys):
        p = tmp_path / "bad.cfg"
        p.write_text("scenario.name = bad\nscenario.kind = counterexample\n")
        assert main(["run", str(p)]) == 1
        assert "missing required key 'flux'" in capsys.readouterr().err

    def test_unknown_kind_exits_one(self, tmp_path, run_root):
        p = tmp_path / "bad.cfg"
        p.write_text("scenario.kind = nope\n")
        assert main(["run", str(p)]) == 1

    def test_missing_file_exits_one(self, run_root):
        assert main(["run", "no_such_scenario"]) == 1

    def test_unused_keys_are_reported(self, tmp_path, run_root):
        p = tmp_path / "extra.cfg"
        p.write_text(SMALL_COUNTEREXAMPLE + "colour = blue\n")
        rep = runner.run_scenario(p)
        assert any("colour" in m for m in rep.messages)


class TestListAndPlot:
    def test_list_empty_run_dir(self, run_root, capsys):
        assert main(["list"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 15
        assert all(line.startswith("shipped") for line in lines)

    def test_list_shows_finished_runs(self, ce_cfg, run_root, capsys):
        main(["run", str(ce_cfg)])
        capsys.readouterr()
        main(["list"])
        assert any(line.startswith("run") and "ce_small" in line
                   for line in capsys.readouterr().out.splitlines())

    def test_plotdata(self, ce_cfg, run_root, capsys):
        main(["run", str(ce_cfg)])
        capsys.readouterr()
        assert main(["plotdata", str(run_root / "ce_small")]) == 0
        paths = capsys.readouterr().out.split()
        assert len(paths) == 2
        text = open(paths[1]).read().splitlines()
        assert text[0] == "x,u,rho,e,sign,t,m,x0,c"
        signs = {int(line.split(",")[4]) for line in text[1:]}
        assert signs <= {-1, 0, 1}

    def test_shipped_scenarios_parse(self):
        for item in runner.list_scenarios("/nonexistent"):
            sc = runner.load_scenario(item["path"])
            assert sc.kind in runner.PIPELINES


class TestFrameVerbs:
    def test_fundamental_then_checks(self, tmp_path, capsys):
        out = tmp_path / "nw.csv"
        assert main(["fundamental", "--kind", "nwave", "--grid=-1,3,400", "--out", str(out)]) == 0
        fr = GridFunction1D.from_csv(out)
        assert fr.t == 1.0 and fr.grid.n == 400
        assert main(["check", "oleinik", "--input", str(out), "--flux", "burgers"]) == 0
        assert main(["check", "tv", "--input", str(out), "--flux", "burgers"]) == 0
        assert main(["check", "admissibility", "--input", str(out), "--flux", "burgers"]) == 0
        assert main(["check", "sweep", "--input", str(out), "--flux", "burgers",
                     "--log", str(tmp_path / "log.csv")]) == 0
        assert (tmp_path / "log.csv").read_text().startswith("t,m,x0,c,connectable")

    def test_check_flags_violation(self, tmp_path):
        from oneside.grid import make_uniform_grid
        g = make_uniform_grid(-1, 3, 400)
        p = tmp_path / "step.csv"
        GridFunction1D(g, 0.5 * ((g.nodes > 0) & (g.nodes < 1)), t=1.0).to_csv(p)
        assert main(["check", "oleinik", "--input", str(p), "--flux", "burgers"]) == 2
        assert main(["check", "sweep", "--input", str(p), "--flux", "burgers"]) == 2

    def test_barenblatt_ab_check(self, tmp_path):
        p = tmp_path / "b.csv"
        assert main(["fundamental", "--kind", "barenblatt", "--gamma", "2", "--out", str(p)]) == 0
        assert main(["check", "ab", "--input", str(p), "--gamma", "2"]) == 0

    def test_fundamental_to_stdout(self, capsys):
        assert main(["fundamental", "--kind", "heat", "--grid=-5,5,10"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "x,value,t" and len(lines) == 12

    def test_missing_flux_is_an_error(self, tmp_path):
        p = tmp_path / "nw.csv"
        main(["fundamental", "--kind", "nwave", "--grid=-1,3,100", "--out", str(p)])
        assert main(["check", "oleinik", "--input", str(p)]) == 1

    def test_bad_grid_argument(self):
        with pytest.raises(SystemExit):
            main(["fundamental", "--kind", "heat", "--grid=1,2"])


class TestHeatND:
    @pytest.mark.parametrize("check", ["psi", "levelset"])
    def test_default_data(self, check, capsys):
        assert main(["heatnd", "--check", check, "--seed", "3"]) == 0
        assert capsys.readouterr().out.strip().endswith("holds")

    def test_round_trip_through_csv(self, tmp_path):
        from oneside import heat_nd as hn
        axes = hn.make_grid_nd(2, -6.0, 6.0, 48)
        p = tmp_path / "u0.csv"
        hn.random_initial_data(axes, 1).to_csv(p)
        out = tmp_path / "u.csv"
        assert main(["heatnd", "--u0", str(p), "--out", str(out)]) == 0
        u = hn.GridFunctionND.from_csv(out)
        assert u.t == 1.0 and np.all(u.values >= 0)
