"""Scenario runner: config file in, run directory with CSVs and a report out.

A scenario is a flat ``key = value`` file whose ``scenario.kind`` picks a
pipeline. The report is written in the same flat format so that
:func:`emit_plotdata` (and people) can read it back. CSV outputs depend only
on the config; the wall-clock time appears in the report alone.
"""
from __future__ import annotations

import csv
import io
import logging
import os
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import config as cf
from . import criteria as cr
from . import families as fam
from . import inequalities as iq
from .flux import FLUXES
from .grid import GridFunction1D, make_uniform_grid
from .levelset import default_tol, sign_pattern

log = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    seed: int
    description: str
    cfg: dict


@dataclass
class RunReport:
    scenario: Scenario
    verdicts: dict = field(default_factory=dict)        # check name -> bool (holds)
    artifacts: list = field(default_factory=list)
    overlays: list = field(default_factory=list)        # (label, t, m, x0, c, u_csv, rho_csv)
    messages: list = field(default_factory=list)
    wall_clock: float = 0.0
    run_dir: Path | None = None

    @property
    def exit_code(self) -> int:
        return EXIT_OK if all(self.verdicts.values()) else EXIT_VIOLATION

    def to_text(self) -> str:
        lines = [f"scenario = {self.scenario.name}", f"kind = {self.scenario.kind}",
                 f"seed = {self.scenario.seed}", f"wall_clock = {self.wall_clock:.3f}",
                 f"exit_code = {self.exit_code}"]
        for k, v in self.verdicts.items():
            lines.append(f"verdict.{k} = {'holds' if v else 'violation'}")
        for i, a in enumerate(self.artifacts, 1):
            lines.append(f"artifact.{i} = {a}")
        for i, (label, t, m, x0, c, u_csv, rho_csv) in enumerate(self.overlays, 1):
            lines.append(f"overlay.{i} = {label} t={t!r} m={m!r} x0={x0!r} c={c!r} "
                         f"u={u_csv} rho={rho_csv}")
        for i, msg in enumerate(self.messages, 1):
            lines.append(f"message.{i} = {msg}")
        for k, v in sorted(self.scenario.cfg.items()):
            lines.append(f"config.{k} = {v}")
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------- catalog

def shipped_dir():
    return resources.files("oneside") / "scenarios"


def _describe(path) -> dict:
    text = path.read_text(encoding="utf-8")
    cfg = cf.parse_text(text, str(path))
    return {"name": cfg.get("scenario.name", path.name[:-4]),
            "kind": cfg.get("scenario.kind", "?"),
            "description": cfg.get("scenario.description", ""), "path": str(path)}


def list_scenarios(run_root=None) -> list:
    """Shipped scenarios, then finished runs found under ``run_root``."""
    out = [dict(_describe(p), source="shipped")
           for p in sorted(shipped_dir().iterdir(), key=lambda p: p.name)
           if p.name.endswith(".cfg")]
    root = Path(run_root) if run_root else default_run_root()
    if root.is_dir():
        for rep in sorted(root.glob("*/report.txt")):
            data = cf.parse_text(rep.read_text(encoding="utf-8"), str(rep))
            out.append({"name": data.get("scenario", rep.parent.name),
                        "kind": data.get("kind", "?"),
                        "description": f"exit {data.get('exit_code', '?')}",
                        "path": str(rep.parent), "source": "run"})
    return out


def resolve(name_or_path) -> Path:
    p = Path(name_or_path)
    if p.exists():
        return p
    stem = p.name[:-4] if p.name.endswith(".cfg") else p.name
    cand = shipped_dir() / f"{stem}.cfg"
    if cand.is_file():
        return Path(str(cand))
    raise FileNotFoundError(f"no scenario file or shipped scenario named {name_or_path!r}")


def default_run_root() -> Path:
    return Path(os.environ.get("ONESIDE_RUN_DIR", "runs"))


# ------------------------------------------------------------------ CSVs

def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _fmt(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


# ------------------------------------------------------------- pipelines

def _flux(r: cf.Reader, key="flux"):
    label = r.str(key, required=True, choices=set(FLUXES))
    return FLUXES[label]() if label in FLUXES else None


def _criterion(sc: Scenario, r: cf.Reader, out: Path, report: RunReport):
    number = r.int("criterion.number", required=True)
    r.check()
    res = cr.run_criterion(number)
    report.verdicts[f"criterion_{number}"] = res.passed
    report.messages.append(res.line())
    (out / "criterion.txt").write_text(res.line() + "\n", encoding="utf-8")
    report.artifacts.append("criterion.txt")


def _oleinik_equivalence(sc: Scenario, r: cf.Reader, out: Path, report: RunReport):
    f = _flux(r)
    times = r.floats("times", (0.5, 1.0, 2.0))
    size = r.int("family.size", 50)
    r.check()
    g = fam.convex_grid()
    rows = []
    agree = 0
    for mem in fam.convex_family(sc.seed, size):
        if mem.flux.label != f.label:
            continue
        for t in times:
            u = mem.build(t, g)
            e = iq.equivalence_oleinik(u, f, t)
            wit = e.sweep.witness or (None, None, None)
            rows.append((mem.name, t, e.classical.holds, e.classical.extremal_value * t,
                         e.sweep.holds, e.agree, wit[0], wit[1]))
            agree += e.agree
    write_csv(out / "equivalence.csv", ["member", "t", "oleinik_holds", "sup_times_t",
                                        "sweep_holds", "agree", "witness_m", "witness_x0"], rows)
    report.artifacts.append("equivalence.csv")
    report.verdicts["equivalence"] = agree == len(rows) and bool(rows)
    report.messages.append(f"agreement {agree}/{len(rows)}")


def _ab_equivalence(sc: Scenario, r: cf.Reader, out: Path, report: RunReport):
    gamma = r.float("gamma", required=True)
    t = r.float("t", 1.0)
    r.check()
    g = fam.pme_grid(gamma)
    rows = []
    for mem in fam.pme_family(gamma, sc.seed):
        e = iq.equivalence_ab(mem.build(t, g), gamma, t)
        rows.append((mem.name, t, e.classical.holds, e.sweep.holds, e.agree))
    write_csv(out / "equivalence.csv", ["member", "t", "ab_holds", "sweep_holds", "agree"], rows)
    report.artifacts.append("equivalence.csv")
    n = sum(r_[-1] for r_ in rows)
    report.verdicts["equivalence"] = n == len(rows)
    report.messages.append(f"agreement {n}/{len(rows)}")


def _save_frame(fr: GridFunction1D, out: Path, name: str) -> str:
    (out / "frames").mkdir(exist_ok=True)
    rel = f"frames/{name}.csv"
    fr.to_csv(out / rel)
    return rel


def _counterexample(sc: Scenario, r: cf.Reader, out: Path, report: RunReport):
    f = _flux(r)
    ul = r.float("profile.u_left", 2.675)
    ur = r.float("profile.u_right", 0.4)
    t = r.float("t", 1.0)
    n = r.int("grid.n", 26667)
    masses = r.floats("sweep.m_values", (0.5, 1.0, 2.0, 4.0, 8.0, 16.0))
    workers = r.int("workers", 1)
    r.check()
    if f.label != "quartic":
        raise cf.ConfigError([f"key 'flux': the counterexample pipeline needs 'quartic', got {f.label!r}"])
    from . import fundamental as fs
    prof = fam.StepProfile(ul, ur, f)
    g = make_uniform_grid(-4.0, 6.0, n)
    u = prof.frame(t, g)
    prov = iq.entropy_provider(f, t, g)
    cvals = iq.comparable_backgrounds(u, iq.plateau_backgrounds(u))
    xj = prof.location(t)
    reach = max(fs.EntropyFundamental(f, c).structure(max(masses), t)["x_shock"] for c in cvals)
    span = (xj - reach, xj)
    solvers = {}

    def E(c):
        if c not in solvers:
            solvers[c] = fs.EntropyFundamental(f, c)
        return solvers[c]

    targets = cr._split_targets(prof, E, cvals, t, 0.2) if ur < ul else []
    u_csv = _save_frame(u, out, "profile")
    for label, cs, tg in (("zero_background", (0.0,), []), ("background", cvals, targets)):
        spec = iq.default_spec(u, t, span=span, c_values=cs, m_values=tuple(masses))
        v = iq.connectability_sweep(u, prov, spec, tg, workers=workers)
        rows = iq.sweep_rows(v, t)
        write_csv(out / f"sweep_{label}.csv", iq.SWEEP_COLUMNS,
                  [[row[k] for k in iq.SWEEP_COLUMNS] for row in rows])
        report.artifacts.append(f"sweep_{label}.csv")
        report.verdicts[f"{label}_sweep"] = v.holds
        if v.witness:
            m, x0, c = v.witness
        else:   # no witness: overlay the middle of the sweep
            m = spec.m_values[len(spec.m_values) // 2]
            x0 = spec.x0_values[len(spec.x0_values) // 2]
            c = spec.c_values[0]
        rho = prov(m, x0, c)
        rho_csv = _save_frame(rho, out, f"rho_{label}")
        report.overlays.append((label, t, m, x0, c, u_csv, rho_csv))
        if v.witness:
            report.messages.append(f"{label} witness m={m:.6g} x0={x0:.6g} c={c:.6g}")
    jumps = iq.admissibility_verdict(u, f, t)
    write_csv(out / "jumps.csv", ["location", "u_left", "u_right", "admissible"],
              [(j.location, j.u_left, j.u_right, j.admissible) for j in jumps])
    report.artifacts.append("jumps.csv")
    report.verdicts["admissibility"] = all(j.admissible for j in jumps)


PIPELINES = {
    "criterion": _criterion,
    "oleinik_equivalence": _oleinik_equivalence,
    "ab_equivalence": _ab_equivalence,
    "counterexample": _counterexample,
}


def load_scenario(path) -> Scenario:
    cfg = cf.read_config(path)
    r = cf.Reader(cfg)
    name = r.str("scenario.name", Path(path).stem)
    kind = r.str("scenario.kind", required=True, choices=set(PIPELINES))
    seed = r.int("scenario.seed", 0)
    desc = r.str("scenario.description", "")
    r.check()
    return Scenario(name, kind, seed, desc, cfg)


def run_scenario(path, run_root=None) -> RunReport:
    """Run one scenario and write ``<run_root>/<name>/report.txt``.

    Config problems raise :class:`~oneside.config.ConfigError` (listing all
    of them); violations are recorded in the verdicts, never raised.
    """
    sc = load_scenario(resolve(path))
    root = Path(run_root) if run_root else default_run_root()
    out = root / sc.name
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(sc, run_dir=out)
    t0 = time.perf_counter()
    r = cf.Reader(sc.cfg)
    for key in ("scenario.name", "scenario.kind", "scenario.seed", "scenario.description"):
        r.used.add(key)
    PIPELINES[sc.kind](sc, r, out, report)
    unused = sorted(set(sc.cfg) - r.used)
    if unused:
        report.messages.append("unused keys: " + ", ".join(unused))
    report.wall_clock = time.perf_counter() - t0
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    return report


# --------------------------------------------------------------- plotdata

def _parse_overlay(text: str) -> dict:
    label, *pairs = text.split()
    d = dict(p.split("=", 1) for p in pairs)
    d["label"] = label
    return d


def emit_plotdata(run_dir) -> list:
    """One ``plot/<label>.csv`` per overlay of the report with columns
    ``x,u,rho,e,sign``. Returns the written paths."""
    run_dir = Path(run_dir)
    rep = cf.parse_text((run_dir / "report.txt").read_text(encoding="utf-8"))
    keys = sorted((k for k in rep if k.startswith("overlay.")), key=lambda k: int(k.split(".")[1]))
    (run_dir / "plot").mkdir(exist_ok=True)
    written = []
    for k in keys:
        ov = _parse_overlay(rep[k])
        u = GridFunction1D.from_csv(run_dir / ov["u"])
        rho = GridFunction1D.from_csv(run_dir / ov["rho"])
        e = rho - u
        signs = sign_pattern(e, default_tol(e)).signs
        path = run_dir / "plot" / f"{ov['label']}.csv"
        write_csv(path, ["x", "u", "rho", "e", "sign", "t", "m", "x0", "c"],
                  [(x, a, b, d, int(s), float(ov["t"]), float(ov["m"]), float(ov["x0"]),
                    float(ov["c"]))
                   for x, a, b, d, s in zip(u.x, u.values, rho.values, e.values, signs)])
        written.append(path)
    return written
