"""Scalar fluxes, rarefaction profiles, convex/concave envelopes and the
chord (Oleinik) admissibility test for jumps."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

CONVEXITY_HINTS = ("convex", "single_inflection", "general")


@dataclass(frozen=True, eq=False)
class Flux:
    """Flux ``f`` with derivative, normalised so that ``f(0) = f'(0) = 0``.

    Use :meth:`normalized` to build one from an arbitrary smooth ``f``; the
    constructor assumes the normalisation already holds.
    """

    eval: Callable
    deriv: Callable
    label: str
    convexity_hint: str = "general"

    def __post_init__(self):
        if self.convexity_hint not in CONVEXITY_HINTS:
            raise ValueError(f"unknown convexity hint {self.convexity_hint!r}")

    def __call__(self, u):
        return self.eval(u)

    @classmethod
    def normalized(cls, f, df, label, convexity_hint="general") -> "Flux":
        f0 = float(f(0.0))
        d0 = float(df(0.0))
        return cls(lambda u: f(u) - f0 - d0 * np.asarray(u, dtype=float),
                   lambda u: df(u) - d0, label, convexity_hint)

    def derivative_error(self, lo: float, hi: float, n: int = 257) -> float:
        """Max mismatch between ``deriv`` and central differences of ``eval``."""
        u = np.linspace(lo, hi, n)
        h = 1e-6 * max(1.0, hi - lo)
        fd = (self.eval(u + h) - self.eval(u - h)) / (2 * h)
        return float(np.max(np.abs(fd - self.deriv(u))))


def burgers() -> Flux:
    return Flux(lambda u: 0.5 * np.square(u), lambda u: np.asarray(u, dtype=float) * 1.0,
                "burgers", "convex")


def cubic() -> Flux:
    return Flux(lambda u: np.power(u, 3) / 3.0, lambda u: np.square(u), "cubic", "convex")


def buckley_leverett() -> Flux:
    def f(u):
        u = np.asarray(u, dtype=float)
        return u * u / (u * u + (1 - u) ** 2)

    def df(u):
        u = np.asarray(u, dtype=float)
        d = u * u + (1 - u) ** 2
        return 2 * u * (1 - u) / (d * d)

    return Flux(f, df, "buckley_leverett", "single_inflection")


def quartic() -> Flux:
    """``u^4/4 - u^3 + u^2 = (u(2-u)/2)^2``: convex, concave, convex."""
    def f(u):
        u = np.asarray(u, dtype=float)
        return 0.25 * u ** 4 - u ** 3 + u * u

    def df(u):
        u = np.asarray(u, dtype=float)
        return u ** 3 - 3 * u * u + 2 * u

    return Flux(f, df, "quartic", "general")


FLUXES = {
    "burgers": burgers,
    "cubic": cubic,
    "buckley_leverett": buckley_leverett,
    "quartic": quartic,
}


def get_flux(label: str) -> Flux:
    try:
        return FLUXES[label]()
    except KeyError:
        raise ValueError(f"unknown flux {label!r}; choose from {sorted(FLUXES)}") from None


def flux_from_table(u, f, label="table", convexity_hint="general") -> Flux:
    """Flux from samples ``(u_i, f_i)`` with strictly increasing ``u``."""
    u = np.asarray(u, dtype=float)
    f = np.asarray(f, dtype=float)
    if u.ndim != 1 or u.shape != f.shape or u.size < 4:
        raise ValueError("need at least 4 matching (u, f) samples")
    if np.any(np.diff(u) <= 0):
        raise ValueError("flux table u column must be strictly increasing")
    spline = CubicSpline(u, f)
    dspline = spline.derivative()
    return Flux.normalized(spline, dspline, label, convexity_hint)


def read_flux_csv(source, label="table") -> Flux:
    from .grid import _read_text

    rows = list(csv.DictReader(io.StringIO(_read_text(source))))
    if not rows or not {"u", "f"} <= set(rows[0]):
        raise ValueError("flux table needs columns u,f")
    return flux_from_table([float(r["u"]) for r in rows],
                           [float(r["f"]) for r in rows], label)


# --------------------------------------------------------------------------
# rarefaction profile g = (f')^{-1}

def _bracket(flux: Flux, ymax: float, lo: float, hi: float):
    # grow hi until f'(hi) >= ymax
    for _ in range(80):
        if flux.deriv(hi) >= ymax:
            return hi
        hi = lo + 2.0 * (hi - lo)
    raise ValueError("f' does not reach the requested range")


def rarefaction_profile(flux: Flux, y, u_lo: float = 0.0, u_hi: float | None = None,
                        check_monotone: bool = True):
    """Solve ``f'(g) = y`` for ``g`` in ``[u_lo, u_hi]`` by bisection.

    ``y`` may be an array. Without ``u_hi`` the bracket is doubled until
    ``f'`` covers ``max(y)``; that requires ``f'`` to be increasing.
    """
    y_arr = np.asarray(y, dtype=float)
    scalar = y_arr.ndim == 0
    y_arr = np.atleast_1d(y_arr)
    dlo = float(flux.deriv(u_lo))
    if y_arr.size and np.min(y_arr) < dlo:
        raise ValueError(f"y={np.min(y_arr)} below range of f' (f'({u_lo})={dlo})")
    ymax = float(np.max(y_arr, initial=dlo))
    if u_hi is None:
        u_hi = _bracket(flux, ymax, u_lo, u_lo + 1.0)
    elif ymax > flux.deriv(u_hi):
        raise ValueError(f"y={ymax} above range of f' on [{u_lo}, {u_hi}]")
    if check_monotone:
        probe = flux.deriv(np.linspace(u_lo, u_hi, 513))
        if np.any(np.diff(probe) < -1e-12 * (1 + np.max(np.abs(probe)))):
            raise ValueError("f' is not monotone on the working range")
    lo = np.full(y_arr.shape, float(u_lo))
    hi = np.full(y_arr.shape, float(u_hi))
    # bisect to full double precision
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        up = flux.deriv(mid) < y_arr
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    g = 0.5 * (lo + hi)
    return float(g[0]) if scalar else g


# --------------------------------------------------------------------------
# envelopes

@dataclass(frozen=True)
class Segment:
    u_lo: float
    u_hi: float
    shape: str  # "linear" | "follows_flux"


@dataclass(frozen=True, eq=False)
class Envelope:
    """Lower-convex or upper-concave hull of a flux on ``[base, u_bar]``."""

    flux: Flux
    base: float
    u_bar: float
    kind: str  # "lower_convex" | "upper_concave"
    segments: tuple

    def linear_segments(self):
        return [s for s in self.segments if s.shape == "linear"]

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = np.asarray(self.flux(u), dtype=float).copy()
        for s in self.linear_segments():
            flo, fhi = float(self.flux(s.u_lo)), float(self.flux(s.u_hi))
            inside = (u >= s.u_lo) & (u <= s.u_hi)
            out = np.where(inside, flo + (fhi - flo) * (u - s.u_lo) / (s.u_hi - s.u_lo), out)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u_lo", "u_hi", "shape", "value_lo", "value_hi"])
        for s in self.segments:
            w.writerow([repr(s.u_lo), repr(s.u_hi), s.shape,
                        repr(float(self.flux(s.u_lo))), repr(float(self.flux(s.u_hi)))])
        return buf.getvalue()


def _lower_hull(u: np.ndarray, f: np.ndarray) -> list:
    """Indices of the lower convex hull (monotone chain; u sorted)."""
    hull = []
    for i in range(len(u)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (u[b] - u[a]) * (f[i] - f[a]) - (f[b] - f[a]) * (u[i] - u[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def _polish_chord(g, p, q, lo_fixed, hi_fixed, base, u_bar, h):
    """Refine the end points of a hull chord of ``g`` (lower hull).

    The left end maximises the secant slope to the right end and vice versa;
    alternate until both stop moving.
    """
    for _ in range(20):
        p_old, q_old = p, q
        if not lo_fixed:
            a, b = max(base, p - 2 * h), min(q - 1e-12, p + 2 * h)
            if b > a:
                res = minimize_scalar(lambda v: (g(q) - g(v)) / (q - v) * -1.0,
                                      bounds=(a, b), method="bounded",
                                      options={"xatol": 1e-13})
                p = float(res.x)
        if not hi_fixed:
            a, b = max(p + 1e-12, q - 2 * h), min(u_bar, q + 2 * h)
            if b > a:
                res = minimize_scalar(lambda v: (g(v) - g(p)) / (v - p),
                                      bounds=(a, b), method="bounded",
                                      options={"xatol": 1e-13})
                q = float(res.x)
        if abs(p - p_old) < 1e-12 and abs(q - q_old) < 1e-12:
            break
    return p, q


def _hull_envelope(flux: Flux, base: float, u_bar: float, n_samples: int, sign: float,
                   kind: str) -> Envelope:
    if not base < u_bar:
        raise ValueError(f"degenerate envelope interval [{base}, {u_bar}]")
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")

    def g(v):
        return sign * float(flux(v))

    u = np.linspace(base, u_bar, n_samples + 1)
    fv = sign * np.asarray(flux(u), dtype=float)
    scale = 1.0 + float(np.max(np.abs(fv)))
    hull = _lower_hull(u, fv)
    h = (u_bar - base) / n_samples
    chords = []
    for a, b in zip(hull[:-1], hull[1:]):
        if b - a <= 1:
            continue
        span = slice(a, b + 1)
        line = fv[a] + (fv[b] - fv[a]) * (u[span] - u[a]) / (u[b] - u[a])
        if np.max(np.abs(fv[span] - line)) <= 1e-12 * scale:
            continue  # f is itself linear here
        p, q = _polish_chord(g, float(u[a]), float(u[b]), a == 0, b == n_samples,
                            base, u_bar, h)
        chords.append((p, q))
    # merge chords that touch after polishing
    merged = []
    for p, q in chords:
        if merged and p <= merged[-1][1] + 1e-10:
            merged[-1] = (merged[-1][0], max(q, merged[-1][1]))
        else:
            merged.append((p, q))
    base, u_bar = float(base), float(u_bar)
    segs = []
    cur = base
    for p, q in merged:
        if p - cur > 1e-10:
            segs.append(Segment(cur, p, "follows_flux"))
        segs.append(Segment(p, q, "linear"))
        cur = q
    if u_bar - cur > 1e-10:
        segs.append(Segment(cur, u_bar, "follows_flux"))
    elif segs:
        last = segs[-1]
        segs[-1] = Segment(last.u_lo, u_bar, last.shape)
    return Envelope(flux, float(base), float(u_bar), kind, tuple(segs))


def convex_envelope(flux: Flux, base: float, u_bar: float, n_samples: int = 4096) -> Envelope:
    """Lower convex envelope of ``flux`` on ``[base, u_bar]``."""
    return _hull_envelope(flux, base, u_bar, n_samples, 1.0, "lower_convex")


def concave_envelope(flux: Flux, base: float, u_bar: float, n_samples: int = 4096) -> Envelope:
    """Upper concave envelope of ``flux`` on ``[base, u_bar]``."""
    return _hull_envelope(flux, base, u_bar, n_samples, -1.0, "upper_concave")


@dataclass(frozen=True)
class ShockCandidate:
    u_left: float
    u_right: float
    speed: float


def chord_speed(flux: Flux, a: float, b: float) -> float:
    if a == b:
        raise ValueError("coincident states")
    return (float(flux(a)) - float(flux(b))) / (a - b)


def shocks_of_envelope(env: Envelope) -> list:
    """One shock per linear piece: increasing for the convex envelope,
    decreasing for the concave one."""
    out = []
    for s in env.linear_segments():
        if env.kind == "lower_convex":
            ul, ur = s.u_lo, s.u_hi
        else:
            ul, ur = s.u_hi, s.u_lo
        out.append(ShockCandidate(ul, ur, chord_speed(env.flux, ul, ur)))
    return out


def chord_admissible(flux: Flux, u_left: float, u_right: float, tol: float | None = None,
                     n_samples: int = 2001) -> bool:
    """Oleinik chord test for the jump ``u_left -> u_right``.

    Walking along the chord from the left state to the right state, the graph
    of ``f`` must stay weakly on the left: below the chord for a decreasing
    jump, above it for an increasing one.
    """
    if u_left == u_right:
        raise ValueError("coincident states")
    lo, hi = min(u_left, u_right), max(u_left, u_right)
    u = np.linspace(lo, hi, n_samples + 2)[1:-1]
    fu = np.asarray(flux(u), dtype=float)
    flo, fhi = float(flux(lo)), float(flux(hi))
    chord = flo + (fhi - flo) * (u - lo) / (hi - lo)
    if tol is None:
        tol = 1e-9 * (1.0 + max(float(np.max(np.abs(fu))), abs(flo), abs(fhi)))
    if u_left > u_right:
        return bool(np.all(fu <= chord + tol))
    return bool(np.all(fu >= chord - tol))


def is_convex_on(flux: Flux, lo: float, hi: float, n: int = 2049) -> bool:
    d = flux.deriv(np.linspace(lo, hi, n))
    return bool(np.all(np.diff(d) >= -1e-12 * (1 + np.max(np.abs(d)))))


def max_speed(flux: Flux, lo: float, hi: float, n: int = 1025) -> float:
    return float(np.max(np.abs(flux.deriv(np.linspace(lo, hi, n)))))

