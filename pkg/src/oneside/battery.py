"""A small battery of viscous problems with seeded initial data.

Each instance pairs a problem family ``eps -> ParabolicProblem`` with a
generator of bounded, nonnegative, compactly supported initial data.
Solutions and fundamental frames are cached per process, so the checks
that share them (connectability, TV, steepness, no-wrinkles) pay for each
solve once.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import solver as sv
from .flux import buckley_leverett, burgers, quartic
from .grid import GridFunction1D

BATTERY_CONFIG = sv.SolverConfig(n=800, radius=7.0, eps_list=(1e-1, 3e-2, 1e-2, 3e-3, 1e-3))
BATTERY_TIMES = (0.25, 0.5, 1.0)
BATTERY_MASSES = (0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class Instance:
    name: str
    family: Callable           # eps -> ParabolicProblem
    max_height: float
    flux: object = None
    gamma: float | None = None
    cfg: sv.SolverConfig = BATTERY_CONFIG


def instances() -> dict:
    return {
        "burgers": Instance("burgers", sv.conservation_law_family(burgers(), scheme="monotone"),
                            1.0, flux=burgers()),
        "quartic": Instance("quartic", sv.conservation_law_family(quartic(), scheme="monotone"),
                            2.8, flux=quartic()),
        "buckley_leverett": Instance("buckley_leverett",
                                     sv.conservation_law_family(buckley_leverett(),
                                                                scheme="monotone"),
                                     1.0, flux=buckley_leverett()),
        # Gaussian tails need a wider domain; same spacing
        "heat": Instance("heat", sv.heat_family(), 1.0,
                         cfg=BATTERY_CONFIG.with_(n=1600, radius=14.0)),
        "pme2": Instance("pme2", sv.porous_medium_family(2.0), 1.0, gamma=2.0),
    }


def random_profile(grid, seed: int, max_height: float = 1.0, box: float = 2.0) -> GridFunction1D:
    """One to three smooth bumps or boxes inside ``[-box, box]``."""
    rng = np.random.default_rng(seed)
    x = grid.nodes
    v = np.zeros_like(x)
    for _ in range(int(rng.integers(1, 4))):
        r = float(rng.uniform(0.2, 0.8))
        c = float(rng.uniform(-box + r, box - r))
        h = float(rng.uniform(0.2, 1.0))
        s = np.abs(x - c) / r
        if rng.random() < 0.7:
            v += h * np.where(s < 1, np.cos(0.5 * np.pi * s) ** 2, 0.0)
        else:
            v += h * (s <= 1)
    peak = float(np.max(v))
    if peak > 0:
        v *= min(1.0, float(rng.uniform(0.5, 1.0)) * max_height / peak)
    return GridFunction1D(grid, v, 0.0, label=f"random(seed={seed})")


@lru_cache(maxsize=None)
def solution(name: str, seed: int, eps: float, t_out: tuple = BATTERY_TIMES) -> sv.Trajectory:
    inst = instances()[name]
    cfg = inst.cfg
    u0 = random_profile(cfg.grid(), seed, inst.max_height)
    return sv.solve(inst.family(eps), u0, t_out, cfg)


@lru_cache(maxsize=None)
def fundamental(name: str, m: float, eps: float, t_out: tuple = BATTERY_TIMES) -> sv.Trajectory:
    """Viscous fundamental frames centred at 0 at the viscosity ``eps``."""
    inst = instances()[name]
    cfg = inst.cfg
    probe = inst.family(eps)
    shape = "ramp" if probe.params.get("kind") == "claw" else "triangle"
    u0 = sv.delta_data(m, 0.0, 0.0, cfg.grid(), cfg.delta_width(t_out[0]), shape)
    return sv.solve(probe, u0, t_out, cfg)
