"""Explicit method-of-lines solver for uniformly parabolic perturbations
``u_t = sigma_eps(t, u, u_x, u_xx)`` and the vanishing-viscosity sweep.

Problems that come in divergence form (conservation laws, porous medium,
heat) also carry a face flux; the solver then uses the conservative update
so that mass is preserved to round-off. Both paths add the smallest
numerical diffusion that keeps the scheme monotone when the cell Peclet
number exceeds two; when the physical viscosity resolves the grid, nothing
is added and the stencil is the plain centred one.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .flux import Flux
from .grid import (Grid1D, GridFunction1D, approximate_delta, check_mass, l1_distance,
                   make_uniform_grid)

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    pass


class BoundaryContamination(SolverError):
    """The solution reached the artificial boundary: enlarge the domain."""


@dataclass(frozen=True, eq=False)
class ParabolicProblem:
    """Right-hand side ``sigma(t, z, p, q)`` of ``u_t = sigma``.

    ``face_flux(t, u, dx)`` is optional. It returns ``(F, diff, speed)``:
    the numerical flux through each of the ``n`` cell faces, the largest
    face diffusivity and the largest advection speed (both feed the time
    step restriction).
    """

    sigma: Callable
    eps: float
    label: str
    background: float = 0.0
    face_flux: Callable | None = None
    params: dict = field(default_factory=dict)


def _minmod(a, b):
    return np.where(a * b > 0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def conservation_law(flux: Flux, eps: float, background: float = 0.0,
                     scheme: str = "muscl") -> ParabolicProblem:
    """``u_t + f(u)_x = eps u_xx``.

    ``scheme="muscl"`` uses minmod-limited reconstruction with a local
    Lax-Friedrichs flux for the convective part (second order away from
    extrema). ``scheme="monotone"`` uses the centred flux plus the smallest
    extra viscosity ``max(eps, alpha dx / 2)`` that keeps the update
    order-preserving; it is the plain centred scheme whenever the cell
    Peclet number is at most two. The diffusion term is centred in both.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if scheme not in ("muscl", "monotone"):
        raise ValueError(f"unknown scheme {scheme!r}")

    def sigma(t, z, p, q):
        return -flux.deriv(z) * p + eps * q

    convex = flux.convexity_hint == "convex"
    probes = np.linspace(0.0, 1.0, 9)[1:-1, None]

    def face_speed(a, b):
        # a convex flux has its largest |f'| on an interval at an end point;
        # otherwise sample the interior as well
        s = np.maximum(np.abs(flux.deriv(a)), np.abs(flux.deriv(b)))
        if not convex:
            s = np.maximum(s, np.max(np.abs(flux.deriv(a + probes * (b - a))), axis=0))
        return s

    def monotone(t, u, dx):
        ul, ur = u[:-1], u[1:]
        fl, fr = flux(ul), flux(ur)
        du = ur - ul
        big = np.abs(du) > 1e-14
        secant = np.where(big, (fr - fl) / np.where(big, du, 1.0), flux.deriv(ul))
        alpha = np.maximum(face_speed(ul, ur), np.abs(secant))
        nu = np.maximum(eps, 0.5 * alpha * dx)
        return -0.5 * (fl + fr) + nu * du / dx, float(np.max(nu)), 0.0

    def muscl(t, u, dx):
        d = np.diff(u)
        slope = np.zeros_like(u)
        slope[1:-1] = _minmod(d[:-1], d[1:])
        ul = u[:-1] + 0.5 * slope[:-1]
        ur = u[1:] - 0.5 * slope[1:]
        alpha = np.maximum(face_speed(ul, ur), face_speed(u[:-1], u[1:]))
        conv = 0.5 * (flux(ul) + flux(ur)) - 0.5 * alpha * (ur - ul)
        return -conv + eps * d / dx, eps, float(np.max(alpha))

    return ParabolicProblem(sigma, eps, f"claw[{flux.label}]", background,
                            muscl if scheme == "muscl" else monotone,
                            {"kind": "claw", "flux": flux, "scheme": scheme})


def porous_medium(gamma: float, eps: float, background: float = 0.0,
                  z_floor: float = 1e-10) -> ParabolicProblem:
    """1-D ``u_t = (u^gamma)_xx + eps u_xx`` with floored coefficients."""
    if gamma <= 0 or gamma == 1:
        raise ValueError("need gamma > 0, gamma != 1")
    if eps <= 0:
        raise ValueError("eps must be positive")

    def sigma(t, z, p, q):
        zf = np.maximum(z, z_floor)
        return gamma * (gamma - 1) * zf ** (gamma - 2) * p * p + gamma * zf ** (gamma - 1) * q + eps * q

    def face_flux(t, u, dx):
        a = np.maximum(u, z_floor)
        phi = a ** gamma
        du = np.diff(a)
        big = np.abs(du) > 1e-14
        dphi = np.diff(phi)
        nu = np.where(big, dphi / np.where(big, du, 1.0),
                      gamma * np.maximum(a[:-1], a[1:]) ** (gamma - 1)) + eps
        return dphi / dx + eps * np.diff(u) / dx, float(np.max(nu)), 0.0

    return ParabolicProblem(sigma, eps, f"pme[gamma={gamma:g}]", background, face_flux,
                            {"kind": "pme", "gamma": gamma, "z_floor": z_floor})


def heat(eps: float = 0.0, background: float = 0.0) -> ParabolicProblem:
    """``u_t = (1 + eps) u_xx``; the parabolicity floor is ``1 + eps``."""
    k = 1.0 + eps

    def sigma(t, z, p, q):
        return k * q

    def face_flux(t, u, dx):
        return k * np.diff(u) / dx, k, 0.0

    return ParabolicProblem(sigma, k, "heat", background, face_flux, {"kind": "heat"})


def conservation_law_family(flux: Flux, background: float = 0.0, scheme: str = "muscl"):
    return lambda eps: conservation_law(flux, eps, background, scheme)


def porous_medium_family(gamma: float, background: float = 0.0, z_floor: float = 1e-10):
    return lambda eps: porous_medium(gamma, eps, background, z_floor)


def heat_family(background: float = 0.0):
    return lambda eps: heat(eps, background)


def sigma_derivatives(problem: ParabolicProblem, t, z, p, q, h: float = 1e-6):
    """Central finite-difference estimates of ``d sigma/dp`` and ``d sigma/dq``."""
    s = problem.sigma
    hp = h * (1.0 + np.abs(p))
    hq = h * (1.0 + np.abs(q))
    sp = (s(t, z, p + hp, q) - s(t, z, p - hp, q)) / (2 * hp)
    sq = (s(t, z, p, q + hq) - s(t, z, p, q - hq)) / (2 * hq)
    return sp, sq


def check_parabolicity(problem: ParabolicProblem, z_range, p_range=(-10.0, 10.0),
                       q_range=(-10.0, 10.0), n: int = 9, t: float = 1.0):
    """Return ``(min, max)`` of ``d sigma/dq`` over a sample box.

    Raises ``ValueError`` if the minimum falls below ``eps``.
    """
    z, p, q = np.meshgrid(np.linspace(*z_range, n), np.linspace(*p_range, n),
                          np.linspace(*q_range, n), indexing="ij")
    _, sq = sigma_derivatives(problem, t, z.ravel(), p.ravel(), q.ravel())
    lo, hi = float(np.min(sq)), float(np.max(sq))
    if lo < problem.eps * (1 - 1e-6):
        raise ValueError(f"d sigma/dq = {lo} below eps = {problem.eps}")
    if not math.isfinite(hi):
        raise ValueError("d sigma/dq unbounded on the sample box")
    return lo, hi


# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    n: int = 4000
    radius: float = 7.0
    center: float = 0.0
    cfl: float = 0.4
    eps_list: tuple = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
    bump_width: float | None = None
    z_floor: float = 1e-10
    t_out: tuple = (1.0,)
    contamination: float = 1e-8
    max_steps: int = 20_000_000
    dt_max: float | None = None    # cap; equal caps give runs identical step sequences

    def grid(self) -> Grid1D:
        return make_uniform_grid(self.center - self.radius, self.center + self.radius, self.n)

    def with_(self, **kw) -> "SolverConfig":
        return replace(self, **kw)

    def delta_width(self, t_first: float) -> float:
        if self.bump_width is not None:
            return self.bump_width
        return max(10 * self.grid().dx, 0.02 * math.sqrt(t_first))


@dataclass(frozen=True, eq=False)
class Trajectory:
    frames: tuple
    problem: ParabolicProblem
    config: SolverConfig
    steps: int = 0

    def at(self, t: float) -> GridFunction1D:
        for fr in self.frames:
            if math.isclose(fr.t, t, rel_tol=1e-12, abs_tol=1e-15):
                return fr
        raise KeyError(f"no frame at t={t}")


def _rhs_faces(problem, t, u, dx):
    F, diff, speed = problem.face_flux(t, u, dx)
    rhs = np.zeros_like(u)
    rhs[1:-1] = (F[1:] - F[:-1]) / dx
    return rhs, diff, speed


def _rhs_generic(problem, t, u, dx):
    p = np.zeros_like(u)
    q = np.zeros_like(u)
    p[1:-1] = (u[2:] - u[:-2]) / (2 * dx)
    q[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / (dx * dx)
    sp, sq = sigma_derivatives(problem, t, u, p, q)
    art = np.maximum(0.0, 0.5 * np.abs(sp) * dx - sq)
    rhs = problem.sigma(t, u, p, q) + art * q
    rhs[0] = rhs[-1] = 0.0
    return rhs, float(np.max(sq + art)), float(np.max(np.abs(sp)))


def solve(problem: ParabolicProblem, u0: GridFunction1D, t_out, cfg: SolverConfig | None = None,
          generic: bool = False) -> Trajectory:
    """Integrate from ``u0`` (taken at ``t = 0``) and return frames at ``t_out``.

    Dirichlet data equal to the problem background are imposed at both ends;
    the nodes next to the boundary are monitored and a
    :class:`BoundaryContamination` is raised if they drift from the
    background by more than ``cfg.contamination * (1 + max|u|)``.
    """
    cfg = cfg or SolverConfig()
    t_out = [float(t) for t in t_out]
    if not t_out or t_out[0] <= 0 or any(b <= a for a, b in zip(t_out, t_out[1:])):
        raise ValueError("t_out must be increasing and positive")
    grid = u0.grid
    dx = grid.dx
    c = problem.background
    u = np.array(u0.values, dtype=float)
    if not np.all(np.isfinite(u)):
        raise SolverError("initial data not finite")
    u[0] = u[-1] = c
    rhs_fn = _rhs_generic if (generic or problem.face_flux is None) else _rhs_faces
    # SSP Heun keeps the limited reconstruction TVD; Euler otherwise
    two_stage = rhs_fn is _rhs_faces and problem.params.get("scheme") == "muscl"
    t = 0.0
    steps = 0
    frames = []
    drift = 0.0
    for target in t_out:
        while target - t > 1e-13 * target:
            rhs, diff, speed = rhs_fn(problem, t, u, dx)
            dt_lim = math.inf
            if diff > 0:
                dt_lim = dx * dx / (2 * diff)
            if speed > 0:
                dt_lim = min(dt_lim, dx / speed)
            if not math.isfinite(dt_lim) and not (diff == 0 and speed == 0):
                raise SolverError("time step unresolvable: sigma_p or sigma_q exploded")
            dt = min(cfg.cfl * dt_lim, target - t)
            if cfg.dt_max is not None:
                dt = min(dt, cfg.dt_max)
            if dt < 1e-15 * max(target, 1.0):
                raise SolverError(f"time step collapsed to {dt:g} at t={t:g}")
            if two_stage:
                u1 = u + dt * rhs
                rhs1, _, _ = rhs_fn(problem, t + dt, u1, dx)
                u = 0.5 * (u + u1 + dt * rhs1)
            else:
                u += dt * rhs
            t = target if target - t <= dt else t + dt
            steps += 1
            # flush far tails: powers of them underflow to subnormals, which are slow
            u[np.abs(u - c) < 1e-60] = c
            if steps % 16 == 0:
                if not np.isfinite(u[1:-1]).all():
                    raise SolverError(f"NaN/Inf detected at t={t:g}")
                drift = max(drift, abs(u[1] - c), abs(u[-2] - c))
            if steps > cfg.max_steps:
                raise SolverError("step budget exhausted")
        if not np.isfinite(u).all():
            raise SolverError(f"NaN/Inf detected at t={t:g}")
        drift = max(drift, abs(u[1] - c), abs(u[-2] - c))
        limit = cfg.contamination * (1.0 + float(np.max(np.abs(u))))
        if drift > limit:
            raise BoundaryContamination(
                f"boundary drift {drift:.3g} > {limit:.3g} by t={target:g}; enlarge the domain")
        frames.append(GridFunction1D(grid, u.copy(), target, label=problem.label))
    return Trajectory(tuple(frames), problem, cfg, steps)


class ContinuationResult(NamedTuple):
    frame: GridFunction1D
    gaps: list
    frames: list
    cauchy: bool


def viscosity_continuation(family, u0: GridFunction1D, eps_list, t: float,
                           cfg: SolverConfig | None = None) -> ContinuationResult:
    """Solve for each ``eps`` (strictly decreasing) and report the L1 gaps
    between consecutive frames. ``cauchy`` is False when a gap fails to shrink
    by at least 10%."""
    cfg = cfg or SolverConfig()
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 4:
        raise ValueError("need at least 4 viscosities")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])) or eps_list[-1] <= 0:
        raise ValueError("eps_list must be positive and strictly decreasing")
    frames = []
    for eps in eps_list:
        frames.append(solve(family(eps), u0, [t], cfg).frames[-1])
        log.debug("eps=%g done", eps)
    gaps = [l1_distance(a, b) for a, b in zip(frames, frames[1:])]
    cauchy = all(g1 <= 0.9 * g0 or g1 <= 1e-12 for g0, g1 in zip(gaps, gaps[1:]))
    if not cauchy:
        log.warning("viscosity continuation not Cauchy: gaps=%s", gaps)
    return ContinuationResult(frames[-1], gaps, frames, cauchy)


def delta_data(m: float, x0: float, c: float, grid: Grid1D, width: float,
               shape: str = "triangle") -> GridFunction1D:
    bump = approximate_delta(m, x0, width, grid, shape)
    return bump.with_values(bump.values + c, label=f"c+delta(m={m:g})")


def fundamental_numeric(family, m: float, x0: float, c: float, t: float,
                        cfg: SolverConfig | None = None, eps: float | None = None,
                        continuation: bool = True) -> GridFunction1D:
    """Numerical fundamental solution with data ``c + m delta(x - x0)``.

    By default runs the whole viscosity continuation and returns the
    finest-eps frame; with ``eps`` given, a single solve at that viscosity.
    """
    cfg = cfg or SolverConfig()
    m = check_mass(m)
    if c < 0:
        raise ValueError("background must be nonnegative")
    grid = cfg.grid()
    # conservation laws get the one-sided ramp (see approximate_delta)
    probe = family(cfg.eps_list[0] if eps is None else eps)
    shape = "ramp" if probe.params.get("kind") == "claw" else "triangle"
    u0 = delta_data(m, x0, c, grid, cfg.delta_width(t), shape)
    if eps is not None:
        fr = solve(family(eps), u0, [t], cfg).frames[-1]
    elif continuation:
        fr = viscosity_continuation(family, u0, cfg.eps_list, t, cfg).frame
    else:
        fr = solve(family(cfg.eps_list[-1]), u0, [t], cfg).frames[-1]
    return fr.with_values(fr.values, label=f"rho(m={m:g},x0={x0:g},c={c:g})")
