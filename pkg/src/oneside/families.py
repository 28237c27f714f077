"""Seeded test families for the equivalence checks.

Each member is built so that its one-sided quantity is an exact multiple
``r`` of the threshold (``sup = r / t`` for Oleinik, ``min = r * thr`` for
Aronson-Benilan), with ``r`` kept at least 5% away from 1 so that no member
sits on the fence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fundamental as fs
from .flux import Flux, burgers, cubic
from .grid import Grid1D, GridFunction1D, make_uniform_grid

HOLD_RATIOS = (0.5, 0.95)
FAIL_RATIOS = (1.05, 3.0)


@dataclass(frozen=True)
class Member:
    name: str
    kind: str
    ratio: float          # quantity / threshold; 1.0 marks an equality member
    build: Callable       # (t, grid) -> GridFunction1D
    flux: Flux | None = None
    gamma: float | None = None

    @property
    def expected_holds(self) -> bool:
        return self.ratio <= 1.0


def convex_grid() -> Grid1D:
    return make_uniform_grid(-6.0, 10.0, 3200)


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3 - 2 * s)


def _scaled(shape: Callable, f: Flux, ratio: float, t: float, grid: Grid1D, x_c: float):
    """Profile ``shape((x - x_c) / L)`` with ``L`` chosen so that the
    Oleinik quotient reaches exactly ``ratio / t``.

    The quotient of ``f'(u(x / L))`` scales like ``1/L``; it is measured on
    a fine reference grid in the shape variable and then rescaled.
    """
    s = np.linspace(-4, 4, 64001)
    q0 = float(np.max(np.diff(f.deriv(shape(s))) / (s[1] - s[0])))
    L = q0 * t / ratio
    vals = shape((grid.nodes - x_c) / L)
    return GridFunction1D(grid, vals, t)


def _ramp_shape(h):
    # smooth rise over s in [0, 1], plateau to s = 1.5, then an admissible drop
    def shape(s):
        return h * np.where(s < 1.5, _smoothstep(s), 0.0)
    return shape


def _bump_shape(h):
    return lambda s: h * np.exp(-s * s)


def _saw_shape(h):
    # two linear ramps separated by decreasing jumps (admissible for convex f)
    def shape(s):
        a = np.where((s >= 0) & (s < 1), h * s, 0.0)
        b = np.where((s >= 1.2) & (s < 2.0), 0.5 * h * (s - 1.2) / 0.8, 0.0)
        return a + b
    return shape


def _step_shape(h):
    # increasing jump at s = 0 (never admissible for convex f), plateau, smooth fall
    def shape(s):
        return h * np.where(s < 0, 0.0, np.where(s < 1, 1.0, 1.0 - _smoothstep(s - 1)))
    return shape


def convex_family(seed: int = 7, size: int = 50) -> list:
    """N-waves, smoothed ramps, Gaussian bumps, sawtooth admissible-shock
    profiles and increasing-jump profiles for Burgers and ``u^3/3``."""
    rng = np.random.default_rng(seed)
    fluxes = (burgers(), cubic())
    out = []
    kinds = ("nwave", "ramp", "bump", "saw", "step")
    for i in range(size):
        kind = kinds[i % len(kinds)]
        f = fluxes[(i // len(kinds)) % 2]
        h = float(rng.uniform(0.5, 1.5))
        x_c = float(rng.uniform(-1.0, 1.0))
        if kind == "nwave":
            m = float(rng.uniform(0.3, 2.0))
            out.append(Member(f"{i:02d}-nwave-{f.label}", kind, 1.0,
                              lambda t, g, f=f, m=m, x_c=x_c: fs.nwave(f, m, t, g, x_c), f))
            continue
        if kind == "step":
            ratio = float("inf")
            shape = _step_shape(h)
            L = float(rng.uniform(0.5, 1.5))
            build = (lambda t, g, shape=shape, L=L, x_c=x_c:
                     GridFunction1D(g, shape((g.nodes - x_c) / L), t))
            out.append(Member(f"{i:02d}-step-{f.label}", kind, ratio, build, f))
            continue
        lo, hi = HOLD_RATIOS if rng.random() < 0.5 else FAIL_RATIOS
        ratio = float(rng.uniform(lo, hi))
        shape = {"ramp": _ramp_shape, "bump": _bump_shape, "saw": _saw_shape}[kind](h)
        build = (lambda t, g, shape=shape, f=f, ratio=ratio, x_c=x_c:
                 _scaled(shape, f, ratio, t, g, x_c))
        out.append(Member(f"{i:02d}-{kind}-{f.label}-r{ratio:.3f}", kind, ratio, build, f))
    return out


# ------------------------------------------------------------- PME / FDE

def pme_grid(gamma: float) -> Grid1D:
    return make_uniform_grid(-8.0, 8.0, 3200)


def _ab_threshold(gamma: float, t: float) -> float:
    return -1.0 / (t * (gamma + 1))


def _from_pressure(P, gamma):
    """Invert ``P = gamma/(gamma-1) u^(gamma-1)``; ``P <= 0`` maps to 0 for
    ``gamma > 1``."""
    if gamma > 1:
        return (np.maximum(P, 0.0) * (gamma - 1) / gamma) ** (1.0 / (gamma - 1))
    return (P * (gamma - 1) / gamma) ** (1.0 / (gamma - 1))


def _parabola_profile(gamma, ratio, t, grid, x_c, height):
    """Pressure ``P = b - kappa (x - x_c)^2`` whose second derivative is
    ``ratio * threshold``. For ``gamma < 1`` pressure is negative so the
    apex ``b`` is negative too."""
    kappa = -0.5 * ratio * _ab_threshold(gamma, t)
    b = gamma / (gamma - 1) * height ** (gamma - 1)
    P = b - kappa * (grid.nodes - x_c) ** 2
    return GridFunction1D(grid, _from_pressure(P, gamma), t)


def _dimpled(gamma, ratio, t, grid, x_c, m):
    """Barenblatt pressure plus a smooth cap whose extra curvature makes the
    minimum second derivative exactly ``ratio * threshold``."""
    thr = _ab_threshold(gamma, t)
    C = fs.barenblatt_constant(gamma, m)
    base = fs.barenblatt_eval(gamma, C, grid.nodes - x_c, t)
    P = gamma / (gamma - 1) * np.where(base > 0, base, 1.0) ** (gamma - 1)
    w = 0.3
    s = (grid.nodes - x_c) / w
    # -A exp(-s^2) has second derivative -2A/w^2 at s = 0 (its minimum)
    A = (ratio - 1.0) * (-thr) * w * w / 2.0
    P = P + A * np.exp(-s * s)
    vals = _from_pressure(P, gamma)
    if gamma > 1:
        vals = np.where(base > 0, vals, 0.0)
    return GridFunction1D(grid, vals, t)


def _barenblatt_sum(gamma, t, grid, x_c, gap, m):
    a = fs.barenblatt(gamma, m, t, grid, x_c - gap / 2, tail_tol=None)
    b = fs.barenblatt(gamma, m, t, grid, x_c + gap / 2, tail_tol=None)
    return a + b


def pme_family(gamma: float, seed: int = 11, size: int = 20) -> list:
    """Barenblatt profiles, pressure parabolas on both sides of the
    threshold, dimpled Barenblatts and (for ``gamma > 1``) sums of two
    Barenblatts that are separated (hold) or overlapping (fail)."""
    rng = np.random.default_rng(seed + int(100 * gamma))
    out = []
    kinds = ("barenblatt", "parabola", "dimple", "pair") if gamma > 1 else \
            ("barenblatt", "parabola", "dimple", "parabola")
    for i in range(size):
        kind = kinds[i % len(kinds)]
        x_c = float(rng.uniform(-0.5, 0.5))
        m = float(rng.uniform(0.5, 2.0))
        if kind == "barenblatt":
            build = lambda t, g, m=m, x_c=x_c: fs.barenblatt(gamma, m, t, g, x_c, tail_tol=None)
            out.append(Member(f"{i:02d}-barenblatt-m{m:.2f}", kind, 1.0, build, gamma=gamma))
            continue
        lo, hi = HOLD_RATIOS if i % 8 < 4 else FAIL_RATIOS
        ratio = float(rng.uniform(lo, hi))
        if kind == "parabola":
            height = float(rng.uniform(0.3, 1.0))
            build = (lambda t, g, ratio=ratio, x_c=x_c, height=height:
                     _parabola_profile(gamma, ratio, t, g, x_c, height))
        elif kind == "dimple":
            ratio = max(ratio, 1.05)   # a cap can only add concavity
            build = lambda t, g, ratio=ratio, x_c=x_c, m=m: _dimpled(gamma, ratio, t, g, x_c, m)
        else:
            radius = fs.barenblatt_support_radius(gamma, m, 2.0)
            sep = ratio <= 1.0
            gap = 2.4 * radius if sep else 1.0 * radius
            ratio = 0.999 if sep else 2.0
            build = lambda t, g, x_c=x_c, gap=gap, m=m: _barenblatt_sum(gamma, t, g, x_c, gap, m)
        out.append(Member(f"{i:02d}-{kind}-r{ratio:.3f}", kind, ratio, build, gamma=gamma))
    return out


# ------------------------------------------------------ nonconvex (quartic)

@dataclass(frozen=True)
class StepProfile:
    """Travelling jump ``u_left`` | ``u_right`` located at ``sigma t``."""
    u_left: float
    u_right: float
    flux: Flux

    @property
    def speed(self) -> float:
        f = self.flux
        return (float(f(self.u_left)) - float(f(self.u_right))) / (self.u_left - self.u_right)

    def location(self, t: float) -> float:
        return self.speed * t

    def frame(self, t: float, grid: Grid1D) -> GridFunction1D:
        x = grid.nodes
        vals = np.where(x < self.location(t), self.u_left, self.u_right)
        return GridFunction1D(grid, vals, t, label=f"step({self.u_left:g},{self.u_right:g})")


def counterexample(flux: Flux | None = None, u_left: float = 2.675,
                   u_right: float = 0.4) -> StepProfile:
    """Weak solution with an inadmissible decreasing jump for the quartic.

    ``(u_left, 0)`` is admissible while ``(u_left, u_right)`` is not; the
    defaults leave room for fundamental solutions with background
    ``u_right`` whose peak lies between ``u_left`` and the level where the
    jump down to ``u_right`` becomes admissible again.
    """
    from .flux import quartic
    return StepProfile(u_left, u_right, flux or quartic())


def nonconvex_family(flux: Flux | None = None) -> list:
    """Quartic test profiles: travelling jumps (one inadmissible, three
    admissible) and exact entropy fundamental frames, each tagged with
    whether it contains an inadmissible jump."""
    from .flux import quartic
    f = flux or quartic()
    out = [
        ("step-2.675-0.4", counterexample(f), False),
        ("step-2.675-0", StepProfile(2.675, 0.0, f), True),
        ("step-2.9-0.4", StepProfile(2.9, 0.4, f), True),
        ("step-2.9-2.675", StepProfile(2.9, 2.675, f), True),
    ]
    for m, c in ((4.0, 0.4), (8.0, 0.0)):
        E = fs.EntropyFundamental(f, c)
        out.append((f"entropy-m{m:g}-c{c:g}",
                    (lambda E=E, m=m: (lambda t, g: E.frame(m, t, g)))(), True))
    return out
