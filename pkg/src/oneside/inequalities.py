"""One-sided inequalities and the connectability sweep that replaces them.

The two classical checks (Oleinik for convex conservation laws,
Aronson-Benilan for porous medium / fast diffusion) are computed directly
on grid data. :func:`connectability_sweep` runs the geometric test against
a family of shifted fundamental solutions, and the ``equivalence_*``
helpers compare both verdicts on the same profile.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import fundamental as fs
from .flux import Flux, chord_admissible
from .grid import GridFunction1D, support_of, total_variation
from .levelset import ConnectabilityReport, is_connectable, sign_pattern

log = logging.getLogger(__name__)


@dataclass
class Verdict:
    holds: bool
    extremal_value: float
    extremal_location: object = None
    threshold: float | None = None
    tol: float = 0.0
    sweep_log: list = field(default_factory=list)
    witness: tuple | None = None       # (m, x0, c) of the first violation
    n_violations: int = 0


# ------------------------------------------------------------------ Oleinik

def oleinik_quotients(u: GridFunction1D, f: Flux) -> np.ndarray:
    """``(f'(u_{i+1}) - f'(u_i)) / dx`` for every cell."""
    return np.diff(f.deriv(u.values)) / u.grid.dx


def oleinik_sup(u: GridFunction1D, f: Flux, t: float) -> float:
    """Largest difference quotient of ``f'(u)``.

    A quotient over any pair of nodes is a weighted mean of the adjacent
    quotients in between, so the adjacent maximum is the pairwise supremum.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    q = oleinik_quotients(u, f)
    return float(np.max(q)) if q.size else 0.0


def oleinik_verdict(u: GridFunction1D, f: Flux, t: float, tol: float | None = None) -> Verdict:
    q = oleinik_quotients(u, f)
    i = int(np.argmax(q))
    sup = float(q[i])
    tol = 1e-6 / t if tol is None else tol
    x = u.x
    return Verdict(sup <= 1.0 / t + tol, sup, (float(x[i]), float(x[i + 1])), 1.0 / t, tol)


def oleinik_witness_pair(u: GridFunction1D, f: Flux, t: float):
    """Widest node pair ``(i1, i2)`` around the worst cell on which every
    adjacent quotient exceeds ``1/t``; ``None`` if the inequality holds."""
    q = oleinik_quotients(u, f)
    i = int(np.argmax(q))
    if q[i] <= 1.0 / t:
        return None
    lo = i
    while lo > 0 and q[lo - 1] > 1.0 / t:
        lo -= 1
    hi = i
    while hi + 1 < q.size and q[hi + 1] > 1.0 / t:
        hi += 1
    return lo, hi + 1


def oleinik_target_x0(u: GridFunction1D, f: Flux, t: float, pair) -> float:
    """Shift that places the fan through the midpoint at the mean speed."""
    i1, i2 = pair
    x, v = u.x, u.values
    return 0.5 * (x[i1] + x[i2]) - 0.5 * t * float(f.deriv(v[i1]) + f.deriv(v[i2]))


# ------------------------------------------------------------ Aronson-Benilan

def pressure(u, gamma: float) -> np.ndarray:
    return gamma / (gamma - 1) * np.asarray(u, dtype=float) ** (gamma - 1)


def _ab_second_differences(u: GridFunction1D, gamma: float, u_floor: float | None):
    if gamma <= 0 or gamma == 1:
        raise ValueError("need gamma > 0, gamma != 1")
    v = u.values
    if u_floor is None:
        u_floor = 1e-9 * float(np.max(np.abs(v), initial=0.0))
    ok = v > u_floor
    if gamma < 1 and not np.all(ok):
        raise ValueError("fast diffusion pressure needs u > 0 everywhere")
    p = np.where(ok, pressure(np.where(ok, v, 1.0), gamma), np.nan)
    d2 = (p[2:] - 2 * p[1:-1] + p[:-2]) / u.grid.dx ** 2
    valid = ok[2:] & ok[1:-1] & ok[:-2]
    return d2, valid


def ab_min(u: GridFunction1D, gamma: float, t: float, u_floor: float | None = None) -> float:
    """Smallest centred second difference of the pressure over nodes whose
    whole stencil lies in ``{u > u_floor}``."""
    if t <= 0:
        raise ValueError("t must be positive")
    d2, valid = _ab_second_differences(u, gamma, u_floor)
    return float(np.min(d2[valid])) if np.any(valid) else 0.0


def ab_verdict(u: GridFunction1D, gamma: float, t: float, tol: float | None = None,
               u_floor: float | None = None) -> Verdict:
    d2, valid = _ab_second_differences(u, gamma, u_floor)
    thr = -1.0 / (t * (gamma + 1))
    tol = 1e-6 / t if tol is None else tol
    if not np.any(valid):
        return Verdict(True, 0.0, None, thr, tol)
    d2v = np.where(valid, d2, np.inf)
    i = int(np.argmin(d2v))
    val = float(d2v[i])
    return Verdict(val >= thr - tol, val, float(u.x[i + 1]), thr, tol)


def ab_witness_triple(u: GridFunction1D, gamma: float, t: float, u_floor=None):
    """Nodes ``(i1, i3)`` bracketing the widest run of over-concave pressure."""
    d2, valid = _ab_second_differences(u, gamma, u_floor)
    thr = -1.0 / (t * (gamma + 1))
    bad = valid & (d2 < thr)
    if not np.any(bad):
        return None
    d2v = np.where(valid, d2, np.inf)
    i = int(np.argmin(d2v))
    lo = hi = i
    while lo > 0 and bad[lo - 1]:
        lo -= 1
    while hi + 1 < bad.size and bad[hi + 1]:
        hi += 1
    # second differences index k covers nodes k, k+1, k+2
    return lo, hi + 2


def ab_target(u: GridFunction1D, gamma: float, t: float, triple) -> tuple:
    """``(m, x0)`` of the Barenblatt profile whose pressure parabola passes
    through the pressure of ``u`` at both ends of the over-concave run."""
    i1, i3 = triple
    x1, x3 = float(u.x[i1]), float(u.x[i3])
    p1, p3 = pressure(u.values[[i1, i3]], gamma)
    k = 1.0 / (2 * t * (gamma + 1))
    # p = -k (x - x0)^2 + b through both points
    x0 = 0.5 * (x1 + x3) - (p1 - p3) / (2 * k * (x3 - x1))
    b = p1 + k * (x1 - x0) ** 2
    C = (gamma - 1) / gamma * b * t ** ((gamma - 1) / (gamma + 1))
    if C <= 0:
        return None
    return fs.barenblatt_mass(gamma, C), x0


# ------------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepSpec:
    m_values: tuple
    x0_values: tuple
    c_values: tuple = (0.0,)
    t: float = 1.0
    tol: float = 1e-6           # relative to max|e|

    def __post_init__(self):
        if not (self.m_values and self.x0_values and self.c_values):
            raise ValueError("sweep lists must be nonempty")
        if self.t <= 0:
            raise ValueError("t must be positive")
        if any(m <= 0 for m in self.m_values) or any(c < 0 for c in self.c_values):
            raise ValueError("masses must be positive and backgrounds nonnegative")

    def points(self):
        for c in self.c_values:
            for m in self.m_values:
                for x0 in self.x0_values:
                    yield (float(m), float(x0), float(c))


def default_m_values(lo=0.25, hi=8.0, n=7) -> tuple:
    return tuple(float(v) for v in np.geomspace(lo, hi, n))


def default_spec(u: GridFunction1D, t: float, span: tuple | None = None, c_values=(0.0,),
                 n_x0: int = 33, m_values=None, tol: float = 1e-6) -> SweepSpec:
    """33 shifts over 1.5 times ``span`` (default: the support of ``u``)."""
    if span is None:
        s = support_of(u, 1e-9 * float(np.max(np.abs(u.values), initial=0.0)))
        span = s if s is not None else (u.grid.x_min, u.grid.x_max)
    mid, half = 0.5 * (span[0] + span[1]), 0.75 * max(span[1] - span[0], u.grid.dx)
    x0 = tuple(float(v) for v in np.linspace(mid - half, mid + half, n_x0))
    return SweepSpec(m_values or default_m_values(), x0, tuple(c_values), t, tol)


def plateau_backgrounds(u: GridFunction1D, min_len: int = 10, rel: float = 1e-6) -> tuple:
    """``{0}`` plus every plateau value of ``u`` (runs of at least ``min_len``
    nodes that are flat to ``rel``) and the same values scaled by 0.9, 1.1."""
    v = u.values
    scale = max(float(np.max(np.abs(v))), 1e-300)
    flat = np.abs(np.diff(v)) <= rel * scale
    vals = set()
    start = None
    for i, f in enumerate(np.append(flat, False)):
        if f and start is None:
            start = i
        elif not f and start is not None:
            if i - start + 1 >= min_len:
                vals.add(round(float(v[start]), 12))
            start = None
    out = {0.0}
    for p in vals:
        if p > 0:
            out.update({p, 0.9 * p, 1.1 * p})
    return tuple(sorted(out))


def check_point(u: GridFunction1D, rho: GridFunction1D, tol_rel: float,
                robust: bool = True) -> tuple:
    """Connectability of ``rho - u``. Returns ``(report, robust_violation)``:
    a violation counts only if it persists at ``tol/10`` and ``10 tol``."""
    e = rho - u
    scale = max(float(np.max(np.abs(e.values))), 1e-300)
    tol = tol_rel * scale
    rep = is_connectable(sign_pattern(e, tol))
    if rep.connectable:
        return rep, False
    if not robust:
        return rep, True
    ok = all(not is_connectable(sign_pattern(e, f * tol)).connectable for f in (0.1, 10.0))
    return rep, ok


def connectability_sweep(u: GridFunction1D, provider: Callable, spec: SweepSpec,
                         targets: Sequence = (), stop_at_first: bool = False,
                         workers: int = 1, robust: bool = True) -> Verdict:
    """Check ``rho(m, x0, c) - u`` for every sweep point (targets first).

    ``provider(m, x0, c)`` returns the shifted fundamental frame on the grid
    of ``u``. The verdict holds when no point yields a robust ``+ - +``.
    """
    pts = [tuple(map(float, p)) for p in targets] + list(spec.points())

    def job(p):
        m, x0, c = p
        try:
            rho = provider(m, x0, c)
        except Exception as exc:  # keep the parameters with the failure
            raise RuntimeError(f"provider failed at m={m}, x0={x0}, c={c}: {exc}") from exc
        return check_point(u, rho, spec.tol, robust)

    logs = []
    witness = None
    n_bad = 0
    if workers > 1 and not stop_at_first:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, pts))
    else:
        results = []
        for p in pts:
            results.append(job(p))
            if stop_at_first and results[-1][1]:
                break
    for p, (rep, bad) in zip(pts, results):
        logs.append((p, rep, bad))
        if bad:
            n_bad += 1
            if witness is None:
                witness = p
    return Verdict(n_bad == 0, float(n_bad), witness, None, spec.tol, logs, witness, n_bad)


def sweep_rows(verdict: Verdict, t: float, flags: str = "") -> list:
    rows = []
    for (m, x0, c), rep, bad in verdict.sweep_log:
        r = rep.row(t=t, m=m, x0=x0, c=c)
        r["scenario_flags"] = flags
        rows.append(r)
    return rows


SWEEP_COLUMNS = ["t", "m", "x0", "c", "connectable", "components", "witness_x1",
                 "witness_x2", "witness_x3", "scenario_flags"]


# -------------------------------------------------------------- providers

def nwave_provider(f: Flux, t: float, grid) -> Callable:
    """Exact shifted N-waves (``c`` must be 0); sampled without a domain check
    so that shifts may push part of the wave off the grid."""
    edge = lru_cache(maxsize=None)(lambda m: fs.nwave_support_edge(f, m, t))

    def provider(m, x0, c):
        if c:
            raise ValueError("closed-form N-wave provider has no background")
        vals = fs.nwave_eval(f, edge(m), grid.nodes - x0, t)
        return GridFunction1D(grid, vals, t)
    return provider


def barenblatt_provider(gamma: float, t: float, grid) -> Callable:
    const = lru_cache(maxsize=None)(lambda m: fs.barenblatt_constant(gamma, m))

    def provider(m, x0, c):
        vals = fs.barenblatt_eval(gamma, const(m), grid.nodes - x0, t) + c
        return GridFunction1D(grid, vals, t)
    return provider


def shift_frame(base: GridFunction1D, x0: float, c: float, grid=None) -> GridFunction1D:
    """``base(x - x0)`` with far field ``c``.

    On the frame's own grid the shift is rounded to a whole number of cells
    and applied exactly; otherwise linear interpolation is used.
    """
    grid = grid or base.grid
    if grid == base.grid:
        k = int(round(x0 / grid.dx))
        vals = np.full(base.values.shape, float(c))
        n = vals.size
        if 0 <= k < n:
            vals[k:] = base.values[:n - k]
        elif -n < k < 0:
            vals[:n + k] = base.values[-k:]
        return GridFunction1D(grid, vals, base.t)
    vals = np.interp(grid.nodes - x0, base.x, base.values, left=c, right=c)
    return GridFunction1D(grid, vals, base.t)


def frame_provider(make_frame: Callable, grid) -> Callable:
    """Provider from ``make_frame(m, c) -> frame centred at x0 = 0``.

    Frames are cached per ``(m, c)``; shifts go through :func:`shift_frame`,
    so shifts are whole cells when the frame lives on ``grid``.
    """
    cache = {}

    def provider(m, x0, c):
        key = (m, c)
        if key not in cache:
            cache[key] = make_frame(m, c)
        return shift_frame(cache[key], x0, c, grid)
    return provider


def entropy_provider(f: Flux, t: float, grid) -> Callable:
    """Exact inviscid fundamental frames with background (see
    :class:`~oneside.fundamental.EntropyFundamental`)."""
    solvers = {}

    def make(m, c):
        if c not in solvers:
            solvers[c] = fs.EntropyFundamental(f, c)
        return solvers[c].frame(m, t, grid)
    return frame_provider(make, grid)


def comparable_backgrounds(u: GridFunction1D, values, rel: float = 1e-9) -> tuple:
    """Backgrounds ``c`` with ``c <= min u`` or ``c >= max u``.

    For those ``c - u`` has one sign, so adding a point mass cannot produce a
    ``+ - +`` pattern at the start; backgrounds strictly between the extreme
    values of ``u`` give a disconnected set from the outset and say nothing
    about admissibility.
    """
    lo, hi = float(np.min(u.values)), float(np.max(u.values))
    tol = rel * max(abs(lo), abs(hi), 1.0)
    return tuple(c for c in values if c <= lo + tol or c >= hi - tol)


# ------------------------------------------------------------- equivalences

@dataclass
class Equivalence:
    agree: bool
    classical: Verdict
    sweep: Verdict
    target: tuple | None = None          # constructed sweep point, if any


def equivalence_oleinik(u: GridFunction1D, f: Flux, t: float, spec: SweepSpec | None = None,
                        stop_at_first: bool = True) -> Equivalence:
    """Compare the Oleinik verdict with the N-wave connectability sweep.

    When the inequality fails, the shift ``x0`` that centres a fan on the worst pair
    and a mass whose support reaches past ``u`` are evaluated first.
    """
    classical = oleinik_verdict(u, f, t)
    spec = spec or default_spec(u, t)
    provider = nwave_provider(f, t, u.grid)
    targets = []
    target = None
    pair = oleinik_witness_pair(u, f, t)
    if pair is not None:
        x0 = oleinik_target_x0(u, f, t, pair)
        supp = support_of(u, 1e-9 * float(np.max(np.abs(u.values)))) or (u.grid.x_min, u.grid.x_max)
        reach = max(supp[1] - x0, t * float(np.max(f.deriv(u.values)))) + 4 * u.grid.dx
        m = max(spec.m_values)
        while fs.nwave_support_edge(f, m, t) <= reach:
            m *= 2.0
        target = (m, x0, 0.0)
        targets = [target]
    sweep = connectability_sweep(u, provider, spec, targets, stop_at_first)
    return Equivalence(classical.holds == sweep.holds, classical, sweep, target)


def extend_masses(m_values, max_of: Callable, u_max: float, factor: float = 2.0) -> tuple:
    """Append doubled masses until ``max_of(m) >= factor * u_max``."""
    ms = list(m_values)
    m = max(ms)
    while max_of(m) < factor * u_max:
        m *= 2.0
        ms.append(m)
        if m > 1e12:
            raise ValueError("mass ladder did not reach the required height")
    return tuple(ms)


def equivalence_ab(u: GridFunction1D, gamma: float, t: float, spec: SweepSpec | None = None,
                   stop_at_first: bool = True, ladder=(1e-4, 1e-3, 1e-2, 3e-2)) -> Equivalence:
    """Compare the Aronson-Benilan verdict with the Barenblatt sweep.

    The mass list is extended upward until the Barenblatt maximum is at least
    twice ``max u``. When the inequality fails, the fitted profile with a
    slightly larger mass (``m' = m (1 + d)`` for ``d`` in ``ladder``) is tried
    first.
    """
    classical = ab_verdict(u, gamma, t)
    spec = spec or default_spec(u, t)
    peak = lambda m: float(fs.barenblatt_eval(gamma, fs.barenblatt_constant(gamma, m), 0.0, t))
    ms = extend_masses(spec.m_values, peak, float(np.max(u.values)))
    spec = SweepSpec(ms, spec.x0_values, spec.c_values, spec.t, spec.tol)
    targets = []
    target = None
    triple = ab_witness_triple(u, gamma, t)
    if triple is not None:
        fit = ab_target(u, gamma, t, triple)
        if fit is not None:
            m, x0 = fit
            target = (m, x0, 0.0)
            targets = [(m * (1 + d), x0, 0.0) for d in ladder]
    sweep = connectability_sweep(u, barenblatt_provider(gamma, t, u.grid), spec, targets,
                                 stop_at_first)
    return Equivalence(classical.holds == sweep.holds, classical, sweep, target)


# ---------------------------------------------------------------------- TV

def tv_ratio(rho: GridFunction1D, c: float, floor: float = 1e-8):
    """``2 sup(rho - c) / |supp(rho - c)|`` or ``None`` when the support is empty."""
    d = rho - c
    s = support_of(d, floor)
    if s is None or s[1] <= s[0]:
        return None
    return 2.0 * float(np.max(d.values)) / (s[1] - s[0])


def tv_ratio_constant(provider: Callable, t: float, spec: SweepSpec, floor: float = 1e-8) -> float:
    """Largest ratio over the ``(c, m)`` pairs of ``spec`` (shifts unused).

    ``provider(m, c, t)`` returns the fundamental frame with background ``c``.
    """
    best = -math.inf
    for c in spec.c_values:
        for m in spec.m_values:
            r = tv_ratio(provider(m, c, t), c, floor)
            if r is None:
                log.warning("empty support for m=%g, c=%g; skipped", m, c)
                continue
            best = max(best, r)
    if best == -math.inf:
        raise ValueError("every sweep pair had empty support")
    return best


def tv_bound_check(u: GridFunction1D, C_t: float, interval=None, tol: float | None = None,
                   floor: float | None = None) -> Verdict:
    """``TV(u) <= C_t |supp u|`` or, with ``interval=(a, b)``, the restricted
    bound ``TV(u on [a, b]) <= C_t (b - a)``.

    The support length is the node extent plus one cell. :func:`tv_ratio`
    uses the bare node extent, so the constant errs on the large side too.
    """
    if C_t <= 0:
        raise ValueError("C_t must be positive")
    scale = float(np.max(np.abs(u.values), initial=0.0))
    tol = 1e-9 * (1 + scale) if tol is None else tol
    if interval is None:
        s = support_of(u, 1e-8 * scale if floor is None else floor)
        if s is None:
            return Verdict(True, 0.0, None, 0.0, tol)
        # each node stands for its cell: the support reaches half a cell
        # beyond the outermost nonzero nodes
        tv = total_variation(u)
        length = min(s[1] - s[0] + u.grid.dx, u.grid.length)
    else:
        a, b = interval
        tv, length = total_variation(u, a, b), b - a
    bound = C_t * length
    return Verdict(tv <= bound + tol, tv, interval, bound, tol)


# ------------------------------------------------------------ admissibility

@dataclass(frozen=True)
class Jump:
    location: float
    u_left: float
    u_right: float
    admissible: bool


def detect_jumps(u: GridFunction1D, jump_threshold: float = 0.2, max_cells: int = 3,
                 plateau: int = 5) -> list:
    """Jumps of size ``> jump_threshold * max|u|`` completed within
    ``max_cells`` cells. States are averages over ``plateau`` nodes on each
    side of the layer. Each entry is ``(x, u_left, u_right, spread)`` where
    ``spread`` is the larger range of values inside the two windows."""
    v = u.values
    scale = float(np.max(np.abs(v), initial=0.0))
    if scale == 0:
        return []
    thr = jump_threshold * scale
    d = np.diff(v)
    steep = np.abs(d) > thr / max_cells
    out = []
    i = 0
    n = d.size
    while i < n:
        if not steep[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and steep[j + 1] and np.sign(d[j + 1]) == np.sign(d[i]):
            j += 1
        total = v[j + 1] - v[i]
        if abs(total) > thr and j - i + 1 <= max_cells:
            lo = max(0, i - plateau + 1)
            hi = min(v.size, j + 1 + plateau)
            wl, wr = v[lo:i + 1], v[j + 1:hi]
            spread = max(float(np.ptp(wl)), float(np.ptp(wr)))
            k = i + int(np.argmax(np.abs(d[i:j + 1])))
            out.append((0.5 * float(u.x[k] + u.x[k + 1]), float(np.mean(wl)),
                        float(np.mean(wr)), spread))
        i = j + 1
    return out


def admissibility_verdict(u: GridFunction1D, f: Flux, t: float | None = None,
                          jump_threshold: float = 0.2) -> list:
    """Every detected jump with its chord (Oleinik entropy) verdict.

    The chord tolerance grows with the uncertainty of the averaged states:
    moving an end point by ``spread`` moves the chord by at most
    ``2 spread max|f'|``. Jumps next to a fan (tangent contacts) need it.
    """
    out = []
    for x, ul, ur, spread in detect_jumps(u, jump_threshold):
        if ul == ur:
            continue
        lo, hi = min(ul, ur), max(ul, ur)
        fu = np.abs(np.asarray(f(np.linspace(lo, hi, 257))))
        slope = float(np.max(np.abs(f.deriv(np.linspace(lo, hi, 257)))))
        tol = 1e-9 * (1.0 + float(np.max(fu))) + 2.0 * spread * slope
        out.append(Jump(x, ul, ur, chord_admissible(f, ul, ur, tol=tol)))
    return out
