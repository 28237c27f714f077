"""Uniform 1-D grids and sampled functions.

Everything here is immutable: a ``GridFunction1D`` owns a read-only copy of
its values, so frames can be shared freely between sweep workers.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

#: relative sign tolerance used for "nonnegative" checks
SIGN_TOL_REL = 1e-9


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid with ``n`` cells and ``n + 1`` nodes on ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ValueError(f"degenerate interval [{self.x_min}, {self.x_max}]")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"need n >= 2 cells, got {self.n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n + 1)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    def contains(self, lo: float, hi: float) -> bool:
        return self.x_min <= lo and hi <= self.x_max

    def index_of(self, x: float) -> int:
        """Index of the node nearest to ``x`` (clipped to the grid)."""
        i = int(round((x - self.x_min) / self.dx))
        return min(max(i, 0), self.n)


def make_uniform_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), int(n))


def check_mass(m: float) -> float:
    m = float(m)
    if not (math.isfinite(m) and m > 0):
        raise ValueError(f"mass must be positive and finite, got {m}")
    return m


@dataclass(frozen=True, eq=False)
class GridFunction1D:
    """Real function sampled on every node of a :class:`Grid1D`.

    ``t`` records the time at which the function was sampled.
    """

    grid: Grid1D
    values: np.ndarray
    t: float = 0.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n + 1,):
            raise ValueError(
                f"expected {self.grid.n + 1} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if self.t < 0:
            raise ValueError("time tag must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values, t: float | None = None, label: str | None = None):
        return GridFunction1D(self.grid, values, self.t if t is None else t,
                              self.label if label is None else label)

    def __sub__(self, other):
        if isinstance(other, GridFunction1D):
            _same_grid(self, other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __add__(self, other):
        if isinstance(other, GridFunction1D):
            _same_grid(self, other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __neg__(self):
        return self.with_values(-self.values)

    def sign_tol(self, rel: float = SIGN_TOL_REL) -> float:
        return rel * float(np.max(np.abs(self.values), initial=0.0))

    def is_nonnegative(self, tol: float | None = None) -> bool:
        tol = self.sign_tol() if tol is None else tol
        return bool(np.min(self.values) >= -tol)

    def interp(self, x) -> np.ndarray:
        """Linear interpolation; zero-order extension outside the grid."""
        return np.interp(x, self.x, self.values)

    def shifted(self, x0: float) -> "GridFunction1D":
        """``v(x - x0)`` sampled on the same grid (linear interpolation)."""
        return self.with_values(self.interp(self.x - x0))

    # CSV: header ``x,value,t``
    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "value", "t"])
        for xi, vi in zip(self.x, self.values):
            w.writerow([repr(float(xi)), repr(float(vi)), repr(float(self.t))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source) -> "GridFunction1D":
        """Read a frame written by :meth:`to_csv` (path or CSV text)."""
        text = _read_text(source)
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty CSV frame")
        missing = {"x", "value"} - set(rows[0])
        if missing:
            raise ValueError(f"CSV frame missing columns: {sorted(missing)}")
        x = np.array([float(r["x"]) for r in rows])
        v = np.array([float(r["value"]) for r in rows])
        t = float(rows[0].get("t") or 0.0)
        if len(x) < 3:
            raise ValueError("frame needs at least 3 nodes")
        dx = np.diff(x)
        if np.any(dx <= 0) or np.ptp(dx) > 1e-9 * max(abs(x[0]), abs(x[-1]), 1.0):
            raise ValueError("CSV frame is not on a uniform increasing grid")
        return cls(Grid1D(float(x[0]), float(x[-1]), len(x) - 1), v, t)


def _read_text(source) -> str:
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8")
    if isinstance(source, str) and "\n" not in source:
        return Path(source).read_text(encoding="utf-8")
    return str(source)


def _same_grid(a: GridFunction1D, b: GridFunction1D):
    if a.grid != b.grid:
        raise ValueError("frames live on different grids")


def trapezoid_weights(grid: Grid1D) -> np.ndarray:
    w = np.full(grid.n + 1, grid.dx)
    w[0] = w[-1] = 0.5 * grid.dx
    return w


def mass_of(u: GridFunction1D) -> float:
    """Composite trapezoid integral of ``u`` over its grid."""
    return float(np.dot(trapezoid_weights(u.grid), u.values))


def l1_distance(u: GridFunction1D, v: GridFunction1D) -> float:
    _same_grid(u, v)
    return float(np.dot(trapezoid_weights(u.grid), np.abs(u.values - v.values)))


def total_variation(u, lo: float | None = None, hi: float | None = None) -> float:
    """Sum of ``|u_{i+1} - u_i|`` over adjacent nodes.

    For sampled data the supremum over partitions is attained by the node
    partition itself. ``lo``/``hi`` restrict to nodes inside ``[lo, hi]``.
    """
    vals = np.asarray(u.values if isinstance(u, GridFunction1D) else u, dtype=float)
    if lo is not None or hi is not None:
        x = u.x
        keep = np.ones_like(x, dtype=bool)
        if lo is not None:
            keep &= x >= lo
        if hi is not None:
            keep &= x <= hi
        vals = vals[keep]
    if vals.size < 2:
        return 0.0
    return float(np.sum(np.abs(np.diff(vals))))


def support_of(u: GridFunction1D, floor: float = 0.0):
    """Smallest ``(lo, hi)`` containing every node with value > ``floor``.

    Returns ``None`` when no node exceeds the floor.
    """
    if floor < 0:
        raise ValueError("floor must be nonnegative")
    idx = np.flatnonzero(u.values > floor)
    if idx.size == 0:
        return None
    x = u.x
    return float(x[idx[0]]), float(x[idx[-1]])


def support_length(u: GridFunction1D, floor: float = 0.0) -> float:
    s = support_of(u, floor)
    return 0.0 if s is None else s[1] - s[0]


def approximate_delta(m: float, x0: float, width: float, grid: Grid1D,
                      shape: str = "triangle") -> GridFunction1D:
    """Bump of total mass ``m`` standing in for ``m delta(x - x0)``.

    ``shape="triangle"`` is the symmetric hat on ``[x0 - w/2, x0 + w/2]``.
    ``shape="ramp"`` vanishes at ``x0`` and rises linearly to a cliff at
    ``x0 + w``: the early-time shape of a convex-flux fundamental solution,
    which keeps the virtual origin of the fan at ``x0``.
    The bump is renormalised after sampling so that ``mass_of`` returns ``m``.
    """
    m = check_mass(m)
    if width < 2 * grid.dx:
        raise ValueError(f"bump width {width} narrower than two cells ({2 * grid.dx})")
    x = grid.nodes
    if shape == "triangle":
        lo, hi = x0 - width / 2, x0 + width / 2
        bump = np.clip(1.0 - np.abs(x - x0) / (0.5 * width), 0.0, None)
    elif shape == "ramp":
        lo, hi = x0, x0 + width
        s = (x - x0) / width
        bump = np.where((s >= 0) & (s <= 1), s, 0.0)
    else:
        raise ValueError(f"unknown bump shape {shape!r}")
    if not grid.contains(lo, hi):
        raise ValueError("bump exits the domain")
    unit = bump / np.dot(trapezoid_weights(grid), bump)
    return GridFunction1D(grid, m * unit, 0.0, label=f"delta(m={m:g},x0={x0:g})")
