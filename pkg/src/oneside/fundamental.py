"""Closed-form fundamental solutions (point-source data ``m delta``).

* N-wave for a convex flux: rarefaction fan ``g(x/t)`` cut off by a single
  decreasing shock whose position comes from mass conservation.
* Barenblatt profile for the porous medium / fast diffusion equation in 1-D.
* Gaussian heat kernel in any dimension.

Support edges and Barenblatt constants are always obtained numerically
(quadrature plus a bracketing root finder) so that every convex flux and every
exponent share a single code path. Closed forms are left to the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .flux import Flux, rarefaction_profile
from .grid import Grid1D, GridFunction1D, check_mass, l1_distance, make_uniform_grid


class DomainTooSmall(ValueError):
    """Raised when a grid cannot hold the requested profile."""


# ------------------------------------------------------------------ N-wave

def _g_scalar(flux: Flux, y: float) -> float:
    """Scalar inverse of ``f'`` on ``u >= 0`` via Brent's method."""
    if y < 0:
        raise ValueError(f"y={y} outside the range of f' on u >= 0")
    if y == 0:
        return 0.0
    hi = 1.0
    while flux.deriv(hi) < y:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError(f"y={y} outside the range of f'")
    return optimize.brentq(lambda u: flux.deriv(u) - y, 0.0, hi, xtol=1e-15, rtol=1e-15)


def nwave_mass(flux: Flux, a: float, t: float) -> float:
    """``int_0^a g(x/t) dx`` by adaptive quadrature."""
    if a <= 0:
        return 0.0
    val, _ = integrate.quad(lambda x: _g_scalar(flux, x / t), 0.0, a,
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def nwave_support_edge(flux: Flux, m: float, t: float) -> float:
    """Right edge ``a_m(t)`` of the N-wave, fixed by conservation of mass."""
    m = check_mass(m)
    if t <= 0:
        raise ValueError("t must be positive")
    hi = math.sqrt(m * t) + 1e-3
    while nwave_mass(flux, hi, t) < m:
        hi *= 2.0
        if hi > 1e8:
            raise ValueError("support edge not bracketed; f' range too small")
    return optimize.brentq(lambda a: nwave_mass(flux, a, t) - m, 0.0, hi,
                           xtol=1e-15 * hi, rtol=1e-15, maxiter=500)


def nwave_eval(flux: Flux, a: float, x, t: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > 0) & (x < a)
    if np.any(inside):
        out[inside] = rarefaction_profile(flux, x[inside] / t)
    return out


def nwave(flux: Flux, m: float, t: float, grid: Grid1D, x0: float = 0.0) -> GridFunction1D:
    """Sampled N-wave ``rho_m(x - x0, t)``."""
    a = nwave_support_edge(flux, m, t)
    if not grid.contains(x0, x0 + a):
        raise DomainTooSmall(f"grid does not contain [{x0}, {x0 + a}]")
    vals = nwave_eval(flux, a, grid.nodes - x0, t)
    return GridFunction1D(grid, vals, t, label=f"nwave[{flux.label}](m={m:g})")


def burgers_background_nwave(m: float, c: float, t: float, grid: Grid1D,
                             x0: float = 0.0) -> GridFunction1D:
    """Entropy solution of Burgers with data ``c + m delta(x - x0)``.

    Galilean invariance of Burgers reduces it to ``c + rho_m(x - x0 - c t)``.
    """
    from .flux import burgers
    f = burgers()
    a = nwave_support_edge(f, m, t)
    s = x0 + c * t
    if not grid.contains(s, s + a):
        raise DomainTooSmall(f"grid does not contain [{s}, {s + a}]")
    vals = c + nwave_eval(f, a, grid.nodes - s, t)
    return GridFunction1D(grid, vals, t, label=f"nwave[burgers](m={m:g},c={c:g})")


# -------------------------------------------------------------- Barenblatt

def _barenblatt_k(gamma: float) -> float:
    return (gamma - 1) / (2 * gamma * (gamma + 1))


def _check_gamma(gamma: float):
    if not (gamma > 0 and gamma != 1):
        raise ValueError(f"need gamma > 0, gamma != 1 (got {gamma})")


def barenblatt_mass(gamma: float, C: float) -> float:
    """Mass of the profile with constant ``C`` (independent of ``t``)."""
    _check_gamma(gamma)
    k = _barenblatt_k(gamma)
    p = 1.0 / (gamma - 1)
    if gamma > 1:
        # (C - k x^2)^p = k^p (r - x)^p (r + x)^p: algebraic endpoint weights
        r = math.sqrt(C / k)
        val, _ = integrate.quad(lambda x: k ** p, -r, r, weight="alg", wvar=(p, p))
    else:
        val, _ = integrate.quad(lambda x: (C - k * x * x) ** p, -np.inf, np.inf,
                                epsabs=0, epsrel=1e-13, limit=200)
    return val


def barenblatt_constant(gamma: float, m: float) -> float:
    """``C_m`` such that the Barenblatt profile carries mass ``m``.

    The mass is a power of ``C`` (increasing for ``gamma > 1``, decreasing
    for ``gamma < 1``); the exponent only seeds the bracket, the root itself
    comes from Brent's method on the quadrature mass.
    """
    m = check_mass(m)
    _check_gamma(gamma)
    e = (gamma + 1) / (2 * (gamma - 1))
    guess = (m / barenblatt_mass(gamma, 1.0)) ** (1.0 / e)
    lo, hi = guess / 2, guess * 2
    g = lambda C: barenblatt_mass(gamma, C) - m
    return optimize.brentq(g, lo, hi, xtol=1e-15 * guess, rtol=1e-15, maxiter=500)


def barenblatt_eval(gamma: float, C: float, x, t: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    k = _barenblatt_k(gamma)
    base = C * t ** ((1 - gamma) / (gamma + 1)) - k * x * x / t
    if gamma > 1:
        return np.maximum(base, 0.0) ** (1.0 / (gamma - 1))
    return base ** (1.0 / (gamma - 1))


def barenblatt_support_radius(gamma: float, m: float, t: float) -> float:
    """Half-width of the support (``inf`` for fast diffusion)."""
    if gamma < 1:
        return math.inf
    C = barenblatt_constant(gamma, m)
    return math.sqrt(C * t ** ((1 - gamma) / (gamma + 1)) * t / _barenblatt_k(gamma))


def barenblatt_tail_mass(gamma: float, m: float, t: float, R: float) -> float:
    """Upper bound on the mass outside ``|x - x0| > R`` (zero for gamma > 1).

    Uses the power-law decay ``(|k| x^2 / t)^(1/(gamma-1))`` of the profile.
    """
    if gamma > 1:
        return 0.0 if R >= barenblatt_support_radius(gamma, m, t) else math.inf
    k = abs(_barenblatt_k(gamma))
    p = 1.0 / (1 - gamma)
    return 2.0 * (k / t) ** (-p) * R ** (1 - 2 * p) / (2 * p - 1)


def barenblatt(gamma: float, m: float, t: float, grid: Grid1D, x0: float = 0.0,
               tail_tol: float | None = 1e-8) -> GridFunction1D:
    """Sampled Barenblatt profile ``rho_m(x - x0, t)``.

    For fast diffusion the profile never vanishes; with ``tail_tol`` set,
    :class:`DomainTooSmall` is raised when the mass outside the grid exceeds
    ``tail_tol * m``. Pass ``tail_tol=None`` to sample a truncated profile.
    """
    _check_gamma(gamma)
    m = check_mass(m)
    if t <= 0:
        raise ValueError("t must be positive")
    R = min(x0 - grid.x_min, grid.x_max - x0)
    if gamma > 1:
        if R < barenblatt_support_radius(gamma, m, t):
            raise DomainTooSmall("grid does not contain the Barenblatt support")
    elif tail_tol is not None and barenblatt_tail_mass(gamma, m, t, R) > tail_tol * m:
        raise DomainTooSmall("fast-diffusion tail mass exceeds tolerance; enlarge domain")
    C = barenblatt_constant(gamma, m)
    vals = barenblatt_eval(gamma, C, grid.nodes - x0, t)
    return GridFunction1D(grid, vals, t, label=f"barenblatt[gamma={gamma:g}](m={m:g})")


# ------------------------------------------------------------- heat kernel

def heat_kernel(m: float, t: float, n_dim: int, point) -> np.ndarray:
    """``m (4 pi t)^(-n/2) exp(-|x|^2 / 4t)``; ``point`` has trailing axis ``n_dim``
    (a scalar or 1-D array is accepted when ``n_dim == 1``)."""
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.asarray(point, dtype=float)
    if n_dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        r2 = x * x
    else:
        if x.shape[-1] != n_dim:
            raise ValueError(f"point has trailing size {x.shape[-1]}, expected {n_dim}")
        r2 = np.sum(x * x, axis=-1)
    return m * (4 * math.pi * t) ** (-n_dim / 2) * np.exp(-r2 / (4 * t))


def heat_frame(m: float, t: float, grid: Grid1D, x0: float = 0.0, c: float = 0.0) -> GridFunction1D:
    vals = c + heat_kernel(m, t, 1, grid.nodes - x0)
    return GridFunction1D(grid, vals, t, label=f"heat(m={m:g})")


# ----------------------------------------------------------------- wrapper

@dataclass(frozen=True, eq=False)
class FundamentalSolution:
    """Tagged fundamental solution; ``sample(grid, t)`` gives a frame."""

    kind: str
    mass: float
    background: float = 0.0
    shift: float = 0.0
    params: dict = field(default_factory=dict)
    provider: Callable | None = None

    def sample(self, grid: Grid1D, t: float) -> GridFunction1D:
        if self.kind == "nwave":
            flux = self.params["flux"]
            if self.background:
                if flux.label != "burgers":
                    raise ValueError("closed-form background N-wave only for Burgers")
                return burgers_background_nwave(self.mass, self.background, t, grid, self.shift)
            return nwave(flux, self.mass, t, grid, self.shift)
        if self.kind == "barenblatt":
            fr = barenblatt(self.params["gamma"], self.mass, t, grid, self.shift,
                            self.params.get("tail_tol", 1e-8))
            return fr + self.background if self.background else fr
        if self.kind == "heat_kernel":
            return heat_frame(self.mass, t, grid, self.shift, self.background)
        if self.kind == "numeric":
            return self.provider(self.mass, self.shift, self.background, t, grid)
        raise ValueError(f"unknown kind {self.kind!r}")


def similarity_check(provider, m: float, t: float, grid: Grid1D) -> float:
    """L1 distance between ``rho_m(m x, m t)`` and ``rho_1(x, t)`` on ``grid``.

    ``provider(m, t, grid)`` returns the mass-``m`` frame at time ``t``;
    the mass-``m`` profile is sampled on the grid scaled by ``m`` so that its
    nodes are exactly ``m x_i``.
    """
    m = check_mass(m)
    scaled = make_uniform_grid(m * grid.x_min, m * grid.x_max, grid.n)
    big = provider(m, m * t, scaled)
    one = provider(1.0, t, grid)
    return l1_distance(one.with_values(big.values), one)


# ------------------------------------------- inviscid fundamental, background

class FrontStructureError(NotImplementedError):
    """The decreasing front needs more than one tangency split."""


class EntropyFundamental:
    """Inviscid entropy solution with data ``c + m delta(x)`` for a flux whose
    top branch is convex.

    The increasing side is the centred wave of the lower convex envelope of
    ``f`` on ``[c, M]``; its mass up to the similarity variable ``y`` has the
    closed form ``h*(y) - h*(y_c) - c (y - y_c)`` with ``h*`` the Legendre
    transform of the envelope. While the jump ``(M, c)`` is admissible the
    decreasing side is that single jump at ``x = t y`` and conservation of
    mass fixes ``y``. Once ``M`` falls to ``M*`` the jump splits: the top
    shock stays tangent to ``f`` at its right state ``u2(M)``, so it moves
    with speed ``f'(u2)`` and sheds characteristics; a second jump
    ``(u1, c)`` leaves the split point with speed ``f'(u1)``.
    """

    def __init__(self, flux: Flux, c: float = 0.0, u_cap: float | None = None):
        from .flux import concave_envelope, convex_envelope
        if c < 0:
            raise ValueError("background must be nonnegative")
        self.flux, self.c = flux, float(c)
        cap = u_cap if u_cap is not None else self.c + 4.0
        env = convex_envelope(flux, self.c, cap)
        while env.segments[-1].shape != "follows_flux":
            cap = self.c + 2.0 * (cap - self.c)
            env = convex_envelope(flux, self.c, cap)
        self.cap = cap
        self.rise = env.segments
        self.top_lo = env.segments[-1].u_lo          # start of the convex top branch
        # the front is most likely to split for the smallest attainable M, just
        # above the start of the convex top branch
        probe = self.top_lo + 1e-6 * (1.0 + self.top_lo)
        upper = concave_envelope(flux, self.c, probe).segments
        self.m_star = None
        self.u1 = None
        if len(upper) > 1:
            if not (len(upper) == 3 and [s.shape for s in upper] ==
                    ["linear", "follows_flux", "linear"]):
                raise FrontStructureError(f"front structure {[s.shape for s in upper]}")
            self.u1 = upper[0].u_hi
            self.concave = self._concave_run(upper[1].u_lo)
            s1 = float(flux.deriv(self.u1))
            line = lambda M: float(flux(M)) - float(flux(self.c)) - s1 * (M - self.c)
            # the tangent line from (c, f(c)) at u1 meets f again on the top branch
            self.m_star = optimize.brentq(line, max(self.top_lo, self.u1 + 1e-9), cap,
                                          xtol=1e-14, rtol=1e-15)
        self._y_c = self._slope_at_base()

    # -- increasing side ------------------------------------------------
    def _slope_at_base(self) -> float:
        s = self.rise[0]
        if s.shape == "linear":
            return chord_speed_safe(self.flux, s.u_lo, s.u_hi)
        return float(self.flux.deriv(self.c))

    def rise_profile(self, y):
        """Value of the centred increasing wave at similarity variable ``y``."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.full(y.shape, self.c)
        for s in self.rise:
            if s.shape == "linear":
                out = np.where(y >= chord_speed_safe(self.flux, s.u_lo, s.u_hi), s.u_hi, out)
            else:
                lo, hi = float(self.flux.deriv(s.u_lo)), float(self.flux.deriv(s.u_hi))
                sel = (y >= lo) & (y <= hi)
                if np.any(sel):
                    out[sel] = rarefaction_profile(self.flux, y[sel], s.u_lo, s.u_hi,
                                                   check_monotone=False)
                out = np.where(y > hi, s.u_hi, out)
        return out

    def _legendre(self, y: float) -> float:
        U = float(self.rise_profile(y)[0])
        return U * y - float(self.flux(U))

    def rise_mass(self, y: float) -> float:
        """Excess mass of the increasing wave on ``[y_c, y]`` per unit time."""
        if y <= self._y_c:
            return 0.0
        return (self._legendre(y) - self._legendre(self._y_c)) - self.c * (y - self._y_c)

    def _y_of_mass(self, q: float) -> float:
        hi = float(self.flux.deriv(self.cap))
        if self.rise_mass(hi) < q:
            raise ValueError("mass beyond the envelope cap; raise u_cap")
        lo = self._y_c
        return optimize.brentq(lambda y: self.rise_mass(y) - q, lo, hi, xtol=1e-15, rtol=1e-15)

    def _top_value(self, y: float) -> float:
        """Scalar inverse of ``f'`` on the convex top branch (clamped to it)."""
        f = self.flux
        lo = self.top_lo
        if y <= float(f.deriv(lo)):
            return lo
        hi = self.cap
        while float(f.deriv(hi)) < y:
            hi = lo + 2.0 * (hi - lo)
        return optimize.brentq(lambda u: float(f.deriv(u)) - y, lo, hi, xtol=1e-15, rtol=1e-15)

    # -- decreasing side ------------------------------------------------
    def _concave_run(self, inside: float, n: int = 20001) -> tuple:
        """Interval around ``inside`` where ``f'`` is decreasing."""
        u = np.linspace(self.c, self.top_lo, n)
        dec = np.diff(self.flux.deriv(u)) < 0
        k = int(np.clip(np.searchsorted(u, inside), 1, n - 1)) - 1
        lo = k
        while lo > 0 and dec[lo - 1]:
            lo -= 1
        hi = k
        while hi < n - 2 and dec[hi + 1]:
            hi += 1
        return float(u[lo]), float(u[hi + 1])

    def _u2(self, M: float) -> float:
        """Tangent point on the concave part of the chord issued from ``M``
        (``u1`` once ``M >= M*``)."""
        if M >= self.m_star:
            return self.u1
        f = self.flux
        g = lambda u: float(f(u)) + float(f.deriv(u)) * (M - u) - float(f(M))
        lo, hi = self.concave
        # g' = f''(u) (M - u) < 0 on the concave run: at most one root
        return optimize.brentq(g, max(lo, self.u1), hi, xtol=1e-15, rtol=1e-15)

    def _u2_many(self, M) -> np.ndarray:
        """Vectorised :meth:`_u2` by bisection (``g`` decreases in ``u``)."""
        f = self.flux
        M = np.asarray(M, dtype=float)
        lo = np.full(M.shape, max(self.concave[0], self.u1))
        hi = np.full(M.shape, self.concave[1])
        fM = f(M)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if np.all((mid == lo) | (mid == hi)):
                break
            pos = f(mid) + f.deriv(mid) * (M - mid) - fM > 0
            lo = np.where(pos, mid, lo)
            hi = np.where(pos, hi, mid)
        return np.where(M >= self.m_star, self.u1, 0.5 * (lo + hi))

    def structure(self, m: float, t: float) -> dict:
        m = check_mass(m)
        if t <= 0:
            raise ValueError("t must be positive")
        out = {"split": False}
        if self.m_star is None:
            y = self._y_of_mass(m / t)
            out.update(x_shock=t * y, M=float(self.rise_profile(y)[0]))
            return out
        y_star = float(self.flux.deriv(self.m_star))
        t_star = m / self.rise_mass(y_star)
        if t <= t_star:
            y = self._y_of_mass(m / t)
            out.update(x_shock=t * y, M=float(self.rise_profile(y)[0]))
            return out
        f = self.flux

        def rhs(s, x):
            # trial stages may overshoot the event; keep M on the top branch
            return [float(f.deriv(self._u2(self._top_value(x[0] / s))))]

        margin = 1e-9 * (1.0 + abs(y_star))
        hit = lambda s, x: x[0] - s * (self._y_c + margin)
        hit.terminal = True
        sol = integrate.solve_ivp(rhs, (t_star, t), [t_star * y_star], rtol=1e-11,
                                  atol=1e-13, dense_output=True, events=hit)
        if sol.status == 1:
            raise FrontStructureError(
                f"top shock meets the increasing side at t={sol.t[-1]:.6g} (m={m:g})")
        if not sol.success:
            raise RuntimeError(sol.message)
        x_s = float(sol.y[0, -1])
        out.update(split=True, t_split=t_star, x_split=t_star * y_star, x_shock=x_s,
                   M=float(self.rise_profile(x_s / t)[0]), path=sol.sol,
                   x_contact=t_star * y_star + float(f.deriv(self.u1)) * (t - t_star))
        return out

    def frame(self, m: float, t: float, grid: Grid1D, x0: float = 0.0,
              n_tau: int = 4001) -> GridFunction1D:
        st = self.structure(m, t)
        x = grid.nodes - x0
        vals = np.full(x.shape, self.c)
        left = x < st["x_shock"]
        vals[left] = self.rise_profile(x[left] / t)
        if st["split"]:
            f = self.flux
            tau = np.linspace(st["t_split"], t, n_tau)
            xs = st["path"](tau)[0]
            tops = self.rise_profile(xs / tau)
            u2 = self._u2_many(tops)
            u2[0] = self.u1
            X = xs + f.deriv(u2) * (t - tau)          # decreasing in tau
            fan = (x >= st["x_shock"]) & (x < st["x_contact"])
            vals[fan] = np.interp(x[fan], X[::-1], u2[::-1])
        return GridFunction1D(grid, vals, t, label=f"entropy[{self.flux.label}](m={m:g},c={self.c:g})")


def chord_speed_safe(flux: Flux, a: float, b: float) -> float:
    return (float(flux(b)) - float(flux(a))) / (b - a)
