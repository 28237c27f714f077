"""The twelve acceptance checks, each runnable on its own.

Every ``criterion_k`` returns a :class:`CriterionResult`; ``run_criterion``
looks them up by number. Defaults are the acceptance resolutions; keyword
overrides exist so that scenarios and quick tests can run smaller versions.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from . import battery as B
from . import families as fam
from . import fundamental as fs
from . import heat_nd as hn
from . import inequalities as iq
from . import solver as sv
from .flux import buckley_leverett, burgers, cubic, quartic
from .grid import GridFunction1D, l1_distance, make_uniform_grid, mass_of
from .levelset import (default_tol, monotonicity_changes, sign_change_count, sign_pattern,
                       steepness_classify)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} {self.title}: {self.summary} ({self.seconds:.1f}s)"


def _timed(number, title):
    def wrap(fn):
        def inner(**kw):
            t0 = time.perf_counter()
            passed, summary, details = fn(**kw)
            return CriterionResult(number, title, bool(passed), summary, details,
                                   time.perf_counter() - t0)
        inner.__name__ = fn.__name__
        inner.__doc__ = fn.__doc__
        inner.number = number
        inner.title = title
        return inner
    return wrap


def shock_edge(fr: GridFunction1D) -> float:
    """Where the profile first falls below half its maximum, right of the
    peak (linear interpolation between nodes)."""
    v, x = fr.values, fr.x
    i = int(np.argmax(v))
    half = 0.5 * v[i]
    j = i + int(np.argmax(v[i:] < half))
    return float(x[j - 1] + (v[j - 1] - half) / (v[j - 1] - v[j]) * (x[j] - x[j - 1]))


# ------------------------------------------------------------------- 1

@_timed(1, "N-wave limit of viscous Burgers")
def criterion_1(n: int = 4000, eps_list=(1e-1, 3e-2, 1e-2, 3e-3, 1e-3), m: float = 1.0,
                t: float = 1.0, l1_tol: float = 2e-2):
    f = burgers()
    cfg = sv.SolverConfig(n=n, radius=7.0, eps_list=tuple(eps_list))
    g = cfg.grid()
    u0 = sv.delta_data(m, 0.0, 0.0, g, cfg.delta_width(t), "ramp")
    res = sv.viscosity_continuation(sv.conservation_law_family(f), u0, cfg.eps_list, t, cfg)
    exact = fs.nwave(f, m, t, g)
    l1 = l1_distance(res.frame, exact)
    a = math.sqrt(2 * m * t)
    edge_err = abs(shock_edge(res.frame) - a)
    ok = l1 <= l1_tol and edge_err <= 2 * g.dx
    return ok, f"L1={l1:.4f} (<= {l1_tol}), |edge-a|={edge_err:.2e} (<= 2dx={2 * g.dx:.2e})", \
        {"l1": l1, "edge_error": edge_err, "dx": g.dx, "gaps": res.gaps, "cauchy": res.cauchy}


# ------------------------------------------------------------------- 2

@_timed(2, "Oleinik equality on N-waves")
def criterion_2(times=(0.5, 1.0, 2.0), masses=(0.5, 1.0, 2.0), tol: float = 1e-8):
    worst = 0.0
    rows = []
    g = make_uniform_grid(-1.0, 6.0, 7000)
    for f in (burgers(), cubic()):
        for t in times:
            for m in masses:
                s = iq.oleinik_sup(fs.nwave(f, m, t, g), f, t)
                err = abs(s - 1.0 / t)
                rows.append((f.label, t, m, s))
                worst = max(worst, err)
    return worst <= tol, f"max |sup - 1/t| = {worst:.2e} over {len(rows)} waves", {"rows": rows}


# ------------------------------------------------------------------- 3

@_timed(3, "Oleinik / connectability equivalence")
def criterion_3(times=(0.5, 1.0, 2.0), size: int = 50, seed: int = 7, x0_rel: float = 0.1):
    g = fam.convex_grid()
    agree = total = 0
    worst_rel = 0.0
    bad = []
    for mem in fam.convex_family(seed, size):
        for t in times:
            u = mem.build(t, g)
            e = iq.equivalence_oleinik(u, mem.flux, t)
            total += 1
            ok = e.agree and e.classical.holds == mem.expected_holds
            if not e.sweep.holds:
                supp = iq.support_of(u, 1e-9 * float(np.max(np.abs(u.values))))
                width = supp[1] - supp[0]
                wit = e.sweep.witness
                rel = (abs(wit[1] - e.target[1]) / max(abs(e.target[1]), width)
                       if e.target is not None else math.inf)
                worst_rel = max(worst_rel, rel)
                ok = ok and rel <= x0_rel
            agree += ok
            if not ok:
                bad.append((mem.name, t))
    passed = agree == total
    return passed, f"{agree}/{total} agree; worst witness x0 offset {worst_rel:.1%}", \
        {"bad": bad, "members": size, "times": tuple(times)}


# ------------------------------------------------------------------- 4

@_timed(4, "Barenblatt and Aronson-Benilan equivalence")
def criterion_4(gammas=(0.5, 2.0), t_family: float = 1.0):
    gamma, m, t = 2.0, 1.0, 1.0
    g = make_uniform_grid(-3.0, 3.0, 6000)
    b = fs.barenblatt(gamma, m, t, g, tail_tol=None)
    # for gamma = 2 the profile is t^(-1/3) (C - x^2 / (12 t^(2/3)))_+ with
    # mass (4/3) sqrt(12) C^(3/2); integrate the sampled constant exactly
    C = fs.barenblatt_constant(gamma, m)
    R = fs.barenblatt_support_radius(gamma, m, t)
    quad_mass = integrate.quad(lambda x: float(fs.barenblatt_eval(gamma, C, x, t)), -R, R,
                               epsabs=1e-14, epsrel=1e-13)[0]
    closed_mass = 4.0 / 3.0 * math.sqrt(12.0) * C ** 1.5
    mass_err = max(abs(quad_mass - 1.0), abs(closed_mass - 1.0))
    grid_mass_err = abs(mass_of(b) - 1.0)
    P = iq.pressure(b.values, gamma)
    inside = np.flatnonzero(b.values > 0)
    core = inside[2:-2]            # second differences that stay in the support
    d2 = (P[core + 1] - 2 * P[core] + P[core - 1]) / g.dx ** 2
    curv_err = float(np.max(np.abs(d2 + 1.0 / (3 * t))))
    counts = {}
    bad = []
    for gm in gammas:
        gg = fam.pme_grid(gm)
        ok_n = 0
        members = fam.pme_family(gm)
        for mem in members:
            u = mem.build(t_family, gg)
            e = iq.equivalence_ab(u, gm, t_family)
            ok = e.agree and e.classical.holds == mem.expected_holds
            ok_n += ok
            if not ok:
                bad.append((gm, mem.name))
        counts[gm] = (ok_n, len(members))
    passed = mass_err <= 1e-8 and curv_err <= 1e-6 and not bad
    agree = ", ".join(f"gamma={k:g}: {a}/{n}" for k, (a, n) in counts.items())
    return passed, f"mass err {mass_err:.1e}, pressure curvature err {curv_err:.1e}; {agree}", \
        {"mass_error": mass_err, "grid_mass_error": grid_mass_err,
         "curvature_error": curv_err, "bad": bad}


# ------------------------------------------------------------------- 5

SIGN_TIMES = (0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.8, 1.0)


@_timed(5, "sign changes never increase")
def criterion_5(names=("heat", "burgers", "pme2"), pairs: int = 20, eps: float = 1e-2,
                times=SIGN_TIMES):
    viol = []
    drops = 0
    for name in names:
        for k in range(pairs):
            a = B.solution(name, 100 + 2 * k, eps, tuple(times))
            b = B.solution(name, 101 + 2 * k, eps, tuple(times))
            counts = []
            for fa, fb in zip(a.frames, b.frames):
                e = fa - fb
                counts.append(sign_change_count(sign_pattern(e, default_tol(e))))
            if any(y > x for x, y in zip(counts, counts[1:])):
                viol.append((name, k, counts))
            drops += counts[-1] < counts[0]
    n = len(names) * pairs
    return not viol, f"{len(viol)} increases over {n} pairs x {len(times)} times " \
        f"({drops} pairs lose sign changes)", {"violations": viol}


# ------------------------------------------------------------------- 6

def _battery_x0(n: int = 33, half: float = 4.0):
    return tuple(float(v) for v in np.linspace(-half, half, n))


@_timed(6, "connectability of viscous solutions")
def criterion_6(names=None, seeds=(1, 2), eps_list=None, masses=B.BATTERY_MASSES,
                n_x0: int = 33):
    names = names or tuple(B.instances())
    eps_list = eps_list or B.BATTERY_CONFIG.eps_list
    points = 0
    viol = []
    for name in names:
        for seed in seeds:
            for eps in eps_list:
                tr = B.solution(name, seed, eps)
                for k, u in enumerate(tr.frames):
                    frames = {m: B.fundamental(name, m, eps).frames[k] for m in masses}
                    prov = iq.frame_provider(lambda m, c, frames=frames: frames[m], u.grid)
                    spec = iq.SweepSpec(tuple(masses), _battery_x0(n_x0), (0.0,), u.t)
                    v = iq.connectability_sweep(u, prov, spec)
                    points += len(v.sweep_log)
                    if not v.holds:
                        viol.append((name, seed, eps, u.t, v.witness))
    return not viol, f"{len(viol)} violating frames, {points} (m, x0) points checked", \
        {"violations": viol, "points": points}


# ------------------------------------------------------------------- 7

def closed_form_frames():
    """Closed-form and exact fundamental frames of every kind."""
    out = []
    g = make_uniform_grid(-6.0, 10.0, 4000)
    for f in (burgers(), cubic()):
        for m in (0.5, 1.0, 2.0, 4.0):
            for t in (0.5, 1.0, 2.0):
                out.append((f"nwave-{f.label}-m{m:g}-t{t:g}", fs.nwave(f, m, t, g)))
    for m, c in ((1.0, 0.5), (2.0, 1.0)):
        out.append((f"nwave-burgers-m{m:g}-c{c:g}", fs.burgers_background_nwave(m, c, 1.0, g)))
    for gamma in (0.5, 2.0, 3.0):
        for m in (0.5, 2.0):
            out.append((f"barenblatt-{gamma:g}-m{m:g}",
                        fs.barenblatt(gamma, m, 1.0, g, tail_tol=None)))
    for m in (0.5, 2.0):
        out.append((f"heat-m{m:g}", fs.heat_frame(m, 1.0, g)))
    gq = make_uniform_grid(-4.0, 10.0, 5600)
    for c in (0.0, 0.4):
        E = fs.EntropyFundamental(quartic(), c)
        for m in (1.0, 4.0, 16.0):
            out.append((f"entropy-quartic-m{m:g}-c{c:g}", E.frame(m, 1.0, gq)))
    return out


@_timed(7, "no wrinkles in fundamental frames")
def criterion_7(names=None, eps_list=None, masses=B.BATTERY_MASSES, include_similarity=True):
    names = names or tuple(B.instances())
    eps_list = eps_list or B.BATTERY_CONFIG.eps_list
    frames = closed_form_frames()
    for name in names:
        for eps in eps_list:
            for m in masses:
                for fr in B.fundamental(name, m, eps).frames:
                    frames.append((f"{name}-eps{eps:g}-m{m:g}-t{fr.t:g}", fr))
    if include_similarity:
        for f in (buckley_leverett(), quartic()):
            for m, t, g in ((1.0, 1.0, SIM_GRID), (2.0, 2.0, _scaled_grid(SIM_GRID, 2.0))):
                frames.append((f"continued-{f.label}-m{m:g}", numeric_fundamental(f.label, m, t, g)))
    bad = [(name, k) for name, fr in frames if (k := monotonicity_changes(fr)) != 1]
    return not bad, f"{len(frames) - len(bad)}/{len(frames)} frames have one monotonicity change", \
        {"bad": bad, "frames": len(frames)}


# ------------------------------------------------------------------- 8

def nonconvex_check(t: float = 1.0, n: int = 26667, masses=(0.5, 1.0, 2.0, 4.0, 8.0, 16.0),
                    peak_frac: float = 0.2):
    """Background sweeps with exact entropy frames for every member of the
    nonconvex family. Returns one dict per member."""
    f = quartic()
    g = make_uniform_grid(-4.0, 6.0, n)
    prov = iq.entropy_provider(f, t, g)
    solvers = {}

    def E(c):
        if c not in solvers:
            solvers[c] = fs.EntropyFundamental(f, c)
        return solvers[c]

    rows = []
    for name, prof, admissible in fam.nonconvex_family(f):
        is_step = isinstance(prof, fam.StepProfile)
        u = prof.frame(t, g) if is_step else prof(t, g)
        cvals = iq.comparable_backgrounds(u, iq.plateau_backgrounds(u))
        span = None
        targets = []
        if is_step:
            xj = prof.location(t)
            reach = max(E(c).structure(max(masses), t)["x_shock"] for c in cvals)
            span = (xj - reach, xj)
            if prof.u_right < prof.u_left:
                targets = _split_targets(prof, E, cvals, t, peak_frac)
        spec = iq.default_spec(u, t, span=span, c_values=cvals, m_values=tuple(masses))
        bg = iq.connectability_sweep(u, prov, spec, targets)
        spec0 = iq.default_spec(u, t, span=span, c_values=(0.0,), m_values=tuple(masses))
        zero = iq.connectability_sweep(u, prov, spec0)
        jumps = iq.admissibility_verdict(u, f, t)
        rows.append({"name": name, "admissible": admissible, "c_values": cvals,
                     "c0_holds": zero.holds, "background_holds": bg.holds,
                     "witness": bg.witness, "n_violations": bg.n_violations,
                     "jumps": [(j.location, j.u_left, j.u_right, j.admissible) for j in jumps],
                     "verdict": bg})
    return rows


def _split_targets(prof, E, cvals, t, peak_frac):
    """Sweep points where the fundamental frame with background ``c`` has
    its top just above ``u_left`` and its fan straddles the jump."""
    out = []
    for c in cvals:
        sol = E(c)
        if sol.m_star is None or not prof.u_left < sol.m_star:
            continue
        top = prof.u_left + peak_frac * (sol.m_star - prof.u_left)
        try:
            m = optimize.brentq(lambda m: sol.structure(m, t)["M"] - top, 0.5, 64.0, xtol=1e-12)
        except (ValueError, fs.FrontStructureError):
            continue
        st = sol.structure(m, t)
        if not st["split"]:
            continue
        width = st["x_contact"] - st["x_shock"]
        xj = prof.location(t)
        for frac in (0.25, 0.5, 0.75):
            out.append((m, xj - st["x_shock"] - frac * width, c))
    return out


@_timed(8, "quartic counterexample and entropy frames")
def criterion_8(**kw):
    rows = nonconvex_check(**kw)
    by = {r["name"]: r for r in rows}
    ce = by["step-2.675-0.4"]
    ce_ok = (ce["c0_holds"] and not ce["background_holds"] and ce["witness"] is not None
             and len(ce["jumps"]) == 1 and not ce["jumps"][0][3])
    entropy_ok = all(r["background_holds"] for r in rows if r["name"].startswith("entropy"))
    coherent = all(r["background_holds"] == all(j[3] for j in r["jumps"]) == r["admissible"]
                   for r in rows)
    wit = ce["witness"]
    wtxt = f"(m={wit[0]:.4g}, x0={wit[1]:.4g}, c={wit[2]:.4g})" if wit else "none"
    return ce_ok and entropy_ok and coherent, \
        f"jump passes c=0 sweep={ce['c0_holds']}, background witness {wtxt}, " \
        f"chord-inadmissible={not ce['jumps'][0][3] if ce['jumps'] else None}; " \
        f"entropy frames pass={entropy_ok}; coherent on {len(rows)} profiles={coherent}", \
        {"rows": [{k: v for k, v in r.items() if k != "verdict"} for r in rows]}


# ------------------------------------------------------------------- 9

def burgers_tv_constant(t: float, masses=(0.25, 0.5, 1.0, 2.0, 4.0, 8.0),
                        c_values=(0.0, 0.25, 0.5, 1.0)) -> float:
    g = make_uniform_grid(-4.0, 8.0, 6000)
    spec = iq.SweepSpec(tuple(masses), (0.0,), tuple(c_values), t)
    return iq.tv_ratio_constant(lambda m, c, t: fs.burgers_background_nwave(m, c, t, g), t, spec)


@_timed(9, "TV bound with C(t) = 2/t")
def criterion_9(seeds=(1, 2), eps_list=None, rel: float = 5e-2):
    eps_list = eps_list or B.BATTERY_CONFIG.eps_list
    consts = {t: burgers_tv_constant(t) for t in B.BATTERY_TIMES}
    const_err = max(abs(C * t / 2 - 1) for t, C in consts.items())
    bad = []
    n = 0
    for seed in seeds:
        for eps in eps_list:
            for fr in B.solution("burgers", seed, eps).frames:
                n += 1
                v = iq.tv_bound_check(fr, consts[fr.t])
                if not v.holds:
                    bad.append((seed, eps, fr.t, v.extremal_value, v.threshold))
    return const_err <= rel and not bad, \
        f"max |C(t) t/2 - 1| = {const_err:.2e}; bound holds on {n - len(bad)}/{n} frames", \
        {"constants": consts, "bad": bad}


# ------------------------------------------------------------------ 10

SIM_GRID = make_uniform_grid(-2.0, 4.0, 1000)
SIM_EPS = (3e-2, 1e-2, 3e-3, 1e-3)


def _scaled_grid(g, m):
    return make_uniform_grid(m * g.x_min, m * g.x_max, g.n)


_NUMERIC_CACHE: dict = {}


def numeric_fundamental(label: str, m: float, t: float, grid) -> GridFunction1D:
    key = (label, m, t, grid.x_min, grid.x_max, grid.n)
    if key not in _NUMERIC_CACHE:
        f = {"buckley_leverett": buckley_leverett(), "quartic": quartic()}[label]
        cfg = sv.SolverConfig(n=grid.n, radius=0.5 * (grid.x_max - grid.x_min),
                              center=0.5 * (grid.x_max + grid.x_min), eps_list=SIM_EPS)
        _NUMERIC_CACHE[key] = sv.fundamental_numeric(sv.conservation_law_family(f),
                                                     m, 0.0, 0.0, t, cfg)
    return _NUMERIC_CACHE[key]


@_timed(10, "similarity law")
def criterion_10(m: float = 2.0, t: float = 1.0, numeric_tol: float = 3e-2):
    g = make_uniform_grid(-2.0, 4.0, 4000)
    closed = {f.label: fs.similarity_check(lambda mm, tt, gg, f=f: fs.nwave(f, mm, tt, gg),
                                           m, t, g) for f in (burgers(), cubic())}
    E = fs.EntropyFundamental(quartic(), 0.0)
    closed["entropy-quartic"] = fs.similarity_check(lambda mm, tt, gg: E.frame(mm, tt, gg), m, t, g)
    numeric = {lab: fs.similarity_check(lambda mm, tt, gg, lab=lab: numeric_fundamental(lab, mm, tt, gg),
                                        m, t, SIM_GRID)
               for lab in ("buckley_leverett", "quartic")}
    ok = all(v <= g.dx for v in closed.values()) and all(v <= numeric_tol for v in numeric.values())
    txt = ", ".join(f"{k}={v:.1e}" for k, v in {**closed, **numeric}.items())
    return ok, f"{txt} (closed <= dx={g.dx:.1e}, numeric <= {numeric_tol})", \
        {"closed": closed, "numeric": numeric}


# ------------------------------------------------------------------ 11

@_timed(11, "heat in 2-D: convex psi and level sets")
def criterion_11(n_fields: int = 10, nodes: int = 256, times=(0.25, 1.0), n_lines: int = 64,
                 radius: float = 8.0):
    axes = hn.make_grid_nd(2, -radius, radius, nodes - 1)
    ratios = (0.5, 1.0, 1.5, 2.0, 4.0)
    shifts = [(a, b) for a in (-1.0, 0.0, 1.0) for b in (-1.0, 0.0, 1.0)]
    psi_bad, set_bad, controls_missed = [], [], []
    worst = math.inf
    for seed in range(n_fields):
        u0 = hn.random_initial_data(axes, seed)
        M = u0.mass()
        rng = np.random.default_rng(1000 + seed)
        for t in times:
            u = hn.heat_convolve(u0, t)
            psi = hn.psi_field(u, M, (0.0, 0.0), t)
            v = hn.convexity_check(psi, n_lines, seed)
            worst = min(worst, v.extremal_value)
            if not v.holds:
                psi_bad.append((seed, t, v.extremal_location))
            for r in ratios:
                for x0 in shifts:
                    if not hn.levelset_convexity(u, r * M, x0, t).holds:
                        set_bad.append((seed, t, r, x0))
            centre = tuple(rng.uniform(-1.5, 1.5, size=2))
            if hn.convexity_check(hn.inject_dimple(psi, centre), n_lines, seed).holds:
                controls_missed.append(("dimple", seed, t))
            ctrl = hn.lshape_control(axes, M, t)
            if hn.levelset_convexity(ctrl, M, (0.0, 0.0), t).holds:
                controls_missed.append(("lshape", seed, t))
    n = n_fields * len(times)
    ok = not psi_bad and not set_bad and not controls_missed
    return ok, f"psi convex {n - len(psi_bad)}/{n} (worst rel. 2nd diff {worst:.1e}), " \
        f"level sets convex at {n * 45 - len(set_bad)}/{n * 45} points, " \
        f"controls missed {len(controls_missed)}", \
        {"psi_bad": psi_bad, "set_bad": set_bad, "controls_missed": controls_missed}


# ------------------------------------------------------------------ 12

def too_steep_control(t: float = 1.0):
    """A hat with twice the largest slope of the heat kernel, placed in the
    kernel's tail so that it rises above it there while staying below the
    kernel's maximum."""
    g = make_uniform_grid(-8.0, 8.0, 3200)
    rho = fs.heat_frame(1.0, t, g)
    slope = float(np.max(np.abs(np.diff(rho.values)))) / g.dx
    x_c = 2.0 * math.sqrt(t)
    h = 0.5 * (float(np.max(rho.values)) + float(fs.heat_kernel(1.0, t, 1, x_c)))
    hat = np.maximum(0.0, h - 2 * slope * np.abs(g.nodes - x_c))
    return GridFunction1D(g, hat, t), rho


@_timed(12, "steepness comparison")
def criterion_12(names=None, seeds=(1, 2), eps_list=None, masses=B.BATTERY_MASSES,
                 n_x0: int = 17):
    names = names or tuple(B.instances())
    eps_list = eps_list or B.BATTERY_CONFIG.eps_list
    pairs = 0
    bad = []
    for name in names:
        for seed in seeds:
            for eps in eps_list:
                tr = B.solution(name, seed, eps)
                for k, u in enumerate(tr.frames):
                    for m in masses:
                        base = B.fundamental(name, m, eps).frames[k]
                        for x0 in _battery_x0(n_x0):
                            r = steepness_classify(u, iq.shift_frame(base, x0, 0.0), u.t)
                            pairs += 1
                            if r.violations:
                                bad.append((name, seed, eps, u.t, m, x0, r.flags()))
    g = make_uniform_grid(-3.0, 7.0, 4000)
    for f in (burgers(), cubic()):
        for m1, m2 in ((1.0, 2.0), (2.0, 1.0), (0.5, 4.0)):
            for x0 in (-1.0, 0.0, 0.5):
                r = steepness_classify(fs.nwave(f, m1, 1.0, g), fs.nwave(f, m2, 1.0, g, x0), 1.0)
                pairs += 1
                if r.violations:
                    bad.append((f.label, m1, m2, x0, r.flags()))
    hat, rho = too_steep_control()
    flagged = bool(steepness_classify(hat, rho, 1.0).violations)
    return not bad and flagged, \
        f"{len(bad)} violations over {pairs} pairs; too-steep control flagged={flagged}", \
        {"bad": bad, "pairs": pairs, "control_flagged": flagged}


CRITERIA = {fn.number: fn for fn in (criterion_1, criterion_2, criterion_3, criterion_4,
                                     criterion_5, criterion_6, criterion_7, criterion_8,
                                     criterion_9, criterion_10, criterion_11, criterion_12)}


def run_criterion(number: int, **overrides) -> CriterionResult:
    if number not in CRITERIA:
        raise KeyError(f"no criterion {number}; choose 1-12")
    return CRITERIA[number](**overrides)
