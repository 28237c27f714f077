"""Command line entry point ``oneside``.

Exit codes: 0 when every check holds, 2 when a violation was found (the
witness is printed), 1 on errors such as bad configuration.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config as cf
from . import fundamental as fs
from . import heat_nd as hn
from . import inequalities as iq
from . import runner
from . import solver as sv
from .flux import FLUXES, get_flux
from .grid import GridFunction1D, make_uniform_grid

log = logging.getLogger("oneside")


def _grid(text: str):
    try:
        lo, hi, n = (s for s in text.split(","))
        return make_uniform_grid(float(lo), float(hi), int(n))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi,n but got {text!r}") from None


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


# ------------------------------------------------------------------ verbs

def cmd_run(args) -> int:
    report = runner.run_scenario(args.scenario, args.run_dir)
    for msg in report.messages:
        print(msg)
    for name, holds in report.verdicts.items():
        print(f"{name}: {'holds' if holds else 'VIOLATION'}")
    print(f"report: {report.run_dir / 'report.txt'}")
    return report.exit_code


def cmd_list(args) -> int:
    for item in runner.list_scenarios(args.run_dir):
        print(f"{item['source']:8s} {item['name']:28s} {item['kind']:20s} {item['description']}")
    return 0


def cmd_plotdata(args) -> int:
    for path in runner.emit_plotdata(args.run_dir):
        print(path)
    return 0


def cmd_criteria(args) -> int:
    from .criteria import CRITERIA, run_criterion
    numbers = args.numbers or sorted(CRITERIA)
    ok = True
    for k in numbers:
        res = run_criterion(k)
        print(res.line(), flush=True)
        ok &= res.passed
    return 0 if ok else 2


def _spec_from(args, u, t, c_default=(0.0,)):
    if args.spec:
        r = cf.Reader(cf.read_config(args.spec))
        m_values = r.floats("sweep.m_values", iq.default_m_values())
        x0 = r.floats("sweep.x0_values")
        n_x0 = r.int("sweep.n_x0", 33)
        c_values = r.floats("sweep.c_values", c_default)
        tol = r.float("sweep.tol", 1e-6)
        r.check()
        if x0:
            return iq.SweepSpec(m_values, x0, c_values, t, tol)
        return iq.default_spec(u, t, c_values=c_values, n_x0=n_x0, m_values=m_values, tol=tol)
    return iq.default_spec(u, t, c_values=c_default)


def cmd_check(args) -> int:
    u = GridFunction1D.from_csv(Path(args.input))
    t = args.t if args.t is not None else u.t
    if not t or t <= 0:
        raise ValueError("a positive time is needed (--t or the frame's t column)")
    what = args.what
    if what in ("oleinik", "tv", "admissibility") or (what == "sweep" and args.gamma is None):
        if args.flux is None:
            raise ValueError(f"check {what} needs --flux")
    if what == "oleinik":
        v = iq.oleinik_verdict(u, get_flux(args.flux), t)
        print(f"oleinik sup = {v.extremal_value!r} at x = {v.extremal_location}, threshold 1/t = {v.threshold!r}")
        return 0 if v.holds else 2
    if what == "ab":
        if args.gamma is None:
            raise ValueError("check ab needs --gamma")
        v = iq.ab_verdict(u, args.gamma, t)
        print(f"min pressure second difference = {v.extremal_value!r} at x = {v.extremal_location}, "
              f"threshold = {v.threshold!r}")
        return 0 if v.holds else 2
    if what == "sweep":
        if args.gamma is not None:
            provider = iq.barenblatt_provider(args.gamma, t, u.grid)
            spec = _spec_from(args, u, t)
        else:
            f = get_flux(args.flux)
            if f.convexity_hint == "convex":
                provider = iq.nwave_provider(f, t, u.grid)
                spec = _spec_from(args, u, t)
            else:
                provider = iq.entropy_provider(f, t, u.grid)
                cvals = iq.comparable_backgrounds(u, iq.plateau_backgrounds(u))
                spec = _spec_from(args, u, t, cvals)
        v = iq.connectability_sweep(u, provider, spec, workers=args.workers)
        if args.log:
            rows = iq.sweep_rows(v, t)
            runner.write_csv(Path(args.log), iq.SWEEP_COLUMNS,
                             [[row[k] for k in iq.SWEEP_COLUMNS] for row in rows])
        print(f"{len(v.sweep_log)} sweep points, {v.n_violations} robust violations")
        if v.witness:
            m, x0, c = v.witness
            print(f"witness m={m!r} x0={x0!r} c={c!r}")
        return 0 if v.holds else 2
    if what == "tv":
        C = args.C
        if C is None:
            if args.flux != "burgers":
                raise ValueError("--C is required unless --flux burgers")
            from .criteria import burgers_tv_constant
            C = burgers_tv_constant(t)
        v = iq.tv_bound_check(u, C)
        print(f"TV = {v.extremal_value!r}, bound C|supp| = {v.threshold!r} (C = {C!r})")
        return 0 if v.holds else 2
    if what == "admissibility":
        jumps = iq.admissibility_verdict(u, get_flux(args.flux), t)
        for j in jumps:
            print(f"jump at x={j.location!r}: {j.u_left!r} -> {j.u_right!r} "
                  f"{'admissible' if j.admissible else 'INADMISSIBLE'}")
        if not jumps:
            print("no jumps detected")
        return 0 if all(j.admissible for j in jumps) else 2
    raise ValueError(f"unknown check {what!r}")  # pragma: no cover


def cmd_fundamental(args) -> int:
    g = args.grid or make_uniform_grid(-8.0, 8.0, 3200)
    kind = args.kind
    if kind == "nwave":
        f = get_flux(args.flux or "burgers")
        fr = (fs.burgers_background_nwave(args.m, args.c, args.t, g, args.x0) if args.c
              else fs.nwave(f, args.m, args.t, g, args.x0))
    elif kind == "barenblatt":
        if args.gamma is None:
            raise ValueError("--gamma is required for barenblatt")
        fr = fs.barenblatt(args.gamma, args.m, args.t, g, args.x0, tail_tol=None) + args.c
    elif kind == "heat":
        fr = fs.heat_frame(args.m, args.t, g, args.x0, args.c)
    elif kind == "entropy":
        E = fs.EntropyFundamental(get_flux(args.flux or "quartic"), args.c)
        fr = E.frame(args.m, args.t, g, args.x0)
    else:
        if args.gamma is not None:
            family = sv.porous_medium_family(args.gamma, args.c)
        elif args.flux == "heat":
            family = sv.heat_family(args.c)
        else:
            family = sv.conservation_law_family(get_flux(args.flux or "burgers"), args.c)
        cfg = sv.SolverConfig(n=g.n, radius=0.5 * g.length, center=0.5 * (g.x_min + g.x_max))
        fr = sv.fundamental_numeric(family, args.m, args.x0, args.c, args.t, cfg)
    text = fr.to_csv(args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_heatnd(args) -> int:
    if args.u0:
        u0 = hn.GridFunctionND.from_csv(Path(args.u0))
    else:
        u0 = hn.random_initial_data(hn.make_grid_nd(2, -8.0, 8.0, 255), args.seed)
    u = hn.heat_convolve(u0, args.t)
    m = args.m if args.m is not None else u0.mass()
    x0 = args.x0 if args.x0 else (0.0,) * u.n_dim
    if args.check == "psi":
        v = hn.convexity_check(hn.psi_field(u, m, x0, args.t), args.lines, args.seed)
        print(f"worst relative second difference {v.extremal_value:.3e} at {v.extremal_location}")
    else:
        v = hn.levelset_convexity(u, m, x0, args.t)
        print(f"nodes outside the set and deeper than the band: {int(v.extremal_value)}")
    if args.out:
        u.to_csv(args.out)
    print("holds" if v.holds else "VIOLATION")
    return 0 if v.holds else 2


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oneside",
                                description="Connectability checks for fundamental solutions "
                                            "of degenerate parabolic equations.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("run", help="run a scenario config (path or shipped name)")
    s.add_argument("scenario")
    s.add_argument("--run-dir", default=None, help="output root (default $ONESIDE_RUN_DIR or ./runs)")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("list", help="list shipped scenarios and finished runs")
    s.add_argument("--run-dir", default=None)
    s.set_defaults(func=cmd_list)

    s = sub.add_parser("plotdata", help="write overlay CSVs for a finished run")
    s.add_argument("run_dir")
    s.set_defaults(func=cmd_plotdata)

    s = sub.add_parser("criteria", help="run acceptance criteria (all by default)")
    s.add_argument("numbers", nargs="*", type=int)
    s.set_defaults(func=cmd_criteria)

    s = sub.add_parser("check", help="check a frame CSV")
    s.add_argument("what", choices=["oleinik", "ab", "sweep", "tv", "admissibility"])
    s.add_argument("--input", required=True, help="frame CSV with columns x,value,t")
    s.add_argument("--flux", choices=sorted(FLUXES))
    s.add_argument("--gamma", type=float)
    s.add_argument("--t", type=float)
    s.add_argument("--spec", help="sweep config (sweep.m_values, sweep.x0_values, ...)")
    s.add_argument("--C", type=float, help="TV constant")
    s.add_argument("--log", help="write the sweep log CSV here")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("fundamental", help="emit a fundamental solution frame as CSV")
    s.add_argument("--kind", required=True, choices=["nwave", "barenblatt", "heat", "numeric", "entropy"])
    s.add_argument("--m", type=float, default=1.0)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--gamma", type=float)
    s.add_argument("--flux", choices=sorted(FLUXES) + ["heat"])
    s.add_argument("--c", type=float, default=0.0)
    s.add_argument("--x0", type=float, default=0.0)
    s.add_argument("--grid", type=_grid, help="lo,hi,n")
    s.add_argument("--out")
    s.set_defaults(func=cmd_fundamental)

    s = sub.add_parser("heatnd", help="multi-dimensional heat checks")
    s.add_argument("--u0", help="ND CSV x1,...,xn,value,t (default: random 2-D data)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--m", type=float)
    s.add_argument("--x0", type=_floats)
    s.add_argument("--check", choices=["psi", "levelset"], default="psi")
    s.add_argument("--lines", type=int, default=64)
    s.add_argument("--out")
    s.set_defaults(func=cmd_heatnd)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except cf.ConfigError as exc:
        for prob in exc.problems:
            print(f"config error: {prob}", file=sys.stderr)
        return runner.EXIT_ERROR
    except (ValueError, FileNotFoundError, KeyError, sv.SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return runner.EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
