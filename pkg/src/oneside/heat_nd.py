"""Heat equation in ``n = 1, 2, 3`` dimensions: exact-kernel convolution,
the ratio ``psi = u / rho_m`` and its convexity, and the convexity of the
positivity set ``{rho_m - u > tol}`` in 2-D.

The solution is obtained by quadrature against the Gaussian kernel rather
than by time stepping. Because the kernel factorises over the axes, the
convolution is a sequence of one matrix product per axis. A useful side
effect: the discrete ``psi`` is a positive combination of exponentials of
linear functions of ``x``, so it is convex on the grid up to round-off.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.spatial import ConvexHull, Delaunay

from .fundamental import DomainTooSmall, heat_kernel
from .grid import Grid1D, _read_text, make_uniform_grid, trapezoid_weights
from .inequalities import Verdict


@dataclass(frozen=True, eq=False)
class GridFunctionND:
    axes: tuple
    values: np.ndarray
    t: float | None = None

    def __post_init__(self):
        axes = tuple(self.axes)
        if not 1 <= len(axes) <= 3:
            raise ValueError("need 1 to 3 axes")
        v = np.array(self.values, dtype=float)
        if v.shape != tuple(g.n + 1 for g in axes):
            raise ValueError(f"values shape {v.shape} does not match the axes")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", v)

    @property
    def n_dim(self) -> int:
        return len(self.axes)

    @property
    def spacing(self) -> tuple:
        return tuple(g.dx for g in self.axes)

    def mesh(self) -> np.ndarray:
        """Node coordinates, shape ``values.shape + (n_dim,)``."""
        return np.stack(np.meshgrid(*[g.nodes for g in self.axes], indexing="ij"), axis=-1)

    def with_values(self, values, t=None) -> "GridFunctionND":
        return GridFunctionND(self.axes, values, self.t if t is None else t)

    def mass(self) -> float:
        v = self.values
        for g in reversed(self.axes):
            v = v @ trapezoid_weights(g)
        return float(v)

    def to_csv(self, path=None) -> str:
        """One row per node: ``x1,...,xn,value,t``."""
        names = [f"x{i + 1}" for i in range(self.n_dim)]
        pts = self.mesh().reshape(-1, self.n_dim)
        vals = self.values.ravel()
        t = "" if self.t is None else repr(float(self.t))
        buf = io.StringIO()
        buf.write(",".join(names + ["value", "t"]) + "\n")
        for p, v in zip(pts, vals):
            buf.write(",".join(repr(float(c)) for c in p) + f",{float(v)!r},{t}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "GridFunctionND":
        text = _read_text(source)
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = [h.strip() for h in lines[0].split(",")]
        if head[-2:] != ["value", "t"] or not head[:-2]:
            raise ValueError("expected header x1,...,xn,value,t")
        n_dim = len(head) - 2
        rows = [ln.split(",") for ln in lines[1:]]
        data = np.array([[float(c) for c in r[:-1]] for r in rows])
        t_txt = rows[0][-1].strip()
        axes = []
        for k in range(n_dim):
            xs = np.unique(data[:, k])
            axes.append(make_uniform_grid(xs[0], xs[-1], xs.size - 1))
        shape = tuple(g.n + 1 for g in axes)
        if data.shape[0] != math.prod(shape):
            raise ValueError("rows do not form a full tensor grid")
        # rows are written in C order of the node index
        order = np.lexsort(tuple(data[:, k] for k in reversed(range(n_dim))))
        vals = data[order, n_dim].reshape(shape)
        return cls(tuple(axes), vals, float(t_txt) if t_txt else None)


def make_grid_nd(n_dim: int, lo: float, hi: float, n: int) -> tuple:
    g = make_uniform_grid(lo, hi, n)
    return tuple(g for _ in range(n_dim))


def _kernel_matrix(g: Grid1D, t: float) -> np.ndarray:
    """``K[i, j] = w_j phi_1(x_i - y_j, t)`` with trapezoid weights ``w``."""
    x = g.nodes
    return heat_kernel(1.0, t, 1, x[:, None] - x[None, :]) * trapezoid_weights(g)[None, :]


def _apply_axes(values: np.ndarray, mats) -> np.ndarray:
    out = values
    for ax, K in enumerate(mats):
        out = np.moveaxis(np.tensordot(K, out, axes=([1], [ax])), 0, ax)
    return out


def heat_convolve(u0: GridFunctionND, t: float, edge_tol: float = 1e-10) -> GridFunctionND:
    """``u(x, t) = int u0(y) phi(x - y, t) dy`` by tensor-product trapezoid
    quadrature with the exact kernel, evaluated on the grid of ``u0``.

    Raises :class:`DomainTooSmall` when ``u0`` is not negligible (relative
    ``edge_tol``) on the boundary of the grid.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    v = u0.values
    if np.any(v < 0):
        raise ValueError("u0 must be nonnegative")
    peak = float(np.max(v, initial=0.0))
    if peak > 0:
        for ax in range(u0.n_dim):
            edge = max(float(np.max(np.take(v, 0, axis=ax))), float(np.max(np.take(v, -1, axis=ax))))
            if edge > edge_tol * peak:
                raise DomainTooSmall("initial data reaches the boundary of the grid")
    mats = [_kernel_matrix(g, t) for g in u0.axes]
    t0 = 0.0 if u0.t is None else float(u0.t)
    return u0.with_values(_apply_axes(v, mats), t=t0 + t)


def heat_eval_points(u0: GridFunctionND, t: float, points: np.ndarray) -> np.ndarray:
    """The same quadrature evaluated at arbitrary points ``(k, n_dim)``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    mats = [heat_kernel(1.0, t, 1, points[:, [ax]] - g.nodes[None, :]) * trapezoid_weights(g)
            for ax, g in enumerate(u0.axes)]
    v = u0.values
    out = np.empty(points.shape[0])
    for k in range(points.shape[0]):
        w = v
        for M in reversed(mats):
            w = w @ M[k]
        out[k] = w
    return out


# ----------------------------------------------------------------- psi

@dataclass(frozen=True, eq=False)
class PsiField:
    field: GridFunctionND
    mass: float
    x0: tuple
    t: float


def fundamental_nd(axes, m: float, x0, t: float) -> np.ndarray:
    g = GridFunctionND(axes, np.zeros(tuple(a.n + 1 for a in axes)))
    pts = g.mesh() - np.asarray(x0, dtype=float)
    return heat_kernel(m, t, len(axes), pts)


def psi_field(u: GridFunctionND, m: float, x0, t: float) -> PsiField:
    """``psi = u / rho_m(. - x0, t)`` on the grid of ``u``."""
    if t <= 0 or m <= 0:
        raise ValueError("need t > 0 and m > 0")
    x0 = tuple(float(c) for c in np.broadcast_to(np.asarray(x0, dtype=float), (u.n_dim,)))
    rho = fundamental_nd(u.axes, m, x0, t)
    if np.min(rho) < 1e-290:
        raise DomainTooSmall("rho_m underflows on the grid; shrink the domain")
    return PsiField(u.with_values(u.values / rho), float(m), x0, float(t))


def lattice_directions(n_dim: int, max_step: int = 3) -> list:
    """Primitive integer directions (first nonzero entry positive)."""
    out = []
    for d in product(range(-max_step, max_step + 1), repeat=n_dim):
        d = np.array(d)
        if not d.any() or math.gcd(*[abs(int(c)) for c in d]) != 1:
            continue
        if d[np.flatnonzero(d)[0]] < 0:
            continue
        out.append(tuple(int(c) for c in d))
    return out


def _line_indices(shape, start, step):
    """Node indices from ``start`` in direction ``step`` (both ways) inside
    the array."""
    start = np.asarray(start)
    step = np.asarray(step)
    shape = np.asarray(shape)

    def reach(sign):
        k = 0
        while True:
            nxt = start + sign * (k + 1) * step
            if np.any(nxt < 0) or np.any(nxt >= shape):
                return k
            k += 1

    back, fwd = reach(-1), reach(1)
    ks = np.arange(-back, fwd + 1)
    return start[None, :] + ks[:, None] * step[None, :]


def convexity_check(psi, n_lines: int = 64, seed: int = 0, rel_tol: float = 1e-8,
                    max_step: int = 3) -> Verdict:
    """Second differences of ``psi`` along lines of the grid.

    Every axis line of the grid is tested, then ``n_lines`` random lines
    with random primitive lattice directions (mostly rotated) through
    random nodes. Lattice lines pass through nodes only,
    so no interpolation is involved. A second difference counts as negative
    when it is below ``-rel_tol`` times the largest of its three values.
    """
    fld = psi.field if isinstance(psi, PsiField) else psi
    v = fld.values
    shape = v.shape
    rng = np.random.default_rng(seed)
    dirs = lattice_directions(fld.n_dim, max_step)
    lines = []
    for _ in range(n_lines):
        start = tuple(int(rng.integers(0, s)) for s in shape)
        lines.append((start, dirs[int(rng.integers(len(dirs)))]))
    worst = math.inf
    worst_at = None
    n_bad = 0
    log = []
    # every axis line at once
    for ax in range(fld.n_dim):
        n = shape[ax]
        if n < 3:
            continue
        a, b, c = (np.take(v, np.arange(k, n - 2 + k), axis=ax) for k in range(3))
        scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.abs(c))
        rel = (a - 2 * b + c) / np.maximum(scale, 1e-300)
        bad = int(np.count_nonzero(rel < -rel_tol))
        n_bad += bad
        k = np.unravel_index(int(np.argmin(rel)), rel.shape)
        log.append(("axis", ax, float(rel[k]), bad))
        if rel[k] < worst:
            worst = float(rel[k])
            node = list(k)
            node[ax] += 1
            worst_at = tuple(float(g.nodes[i]) for g, i in zip(fld.axes, node))
    for start, step in lines:
        idx = _line_indices(shape, start, step)
        if idx.shape[0] < 3:
            continue
        vals = v[tuple(idx.T)]
        d2 = vals[:-2] - 2 * vals[1:-1] + vals[2:]
        scale = np.maximum.reduce([np.abs(vals[:-2]), np.abs(vals[1:-1]), np.abs(vals[2:])])
        rel = d2 / np.maximum(scale, 1e-300)
        k = int(np.argmin(rel))
        bad = int(np.count_nonzero(rel < -rel_tol))
        n_bad += bad
        log.append((start, step, float(rel[k]), bad))
        if rel[k] < worst:
            worst = float(rel[k])
            node = idx[k + 1]
            worst_at = tuple(float(g.nodes[i]) for g, i in zip(fld.axes, node))
    return Verdict(n_bad == 0, worst, worst_at, -rel_tol, rel_tol, log, None, n_bad)


def inject_dimple(psi: PsiField, centre, width: float = 0.5, curvature: float = -1.0) -> PsiField:
    """Negative control: add a Gaussian bump whose curvature at ``centre``
    is ``curvature`` times the largest value of ``psi`` within one width
    (plus the local convex curvature, so the sum has the requested sign)."""
    fld = psi.field
    pts = fld.mesh() - np.asarray(centre, dtype=float)
    r2 = np.sum(pts * pts, axis=-1)
    near = r2 <= width * width
    local = float(np.max(fld.values[near])) if np.any(near) else float(np.max(fld.values))
    # second axis differences of psi near the centre bound its own curvature
    kappa = 0.0
    for ax in range(fld.n_dim):
        d2 = np.diff(fld.values, 2, axis=ax) / (fld.spacing[ax] ** 2)
        sl = [slice(None)] * fld.n_dim
        sl[ax] = slice(1, -1)
        kappa = max(kappa, float(np.max(d2[near[tuple(sl)]], initial=0.0)))
    target = abs(curvature) * local + kappa
    amp = target * width * width          # A exp(-r^2 / 2w^2) has curvature -A / w^2
    bump = amp * np.exp(-r2 / (2 * width * width))
    return PsiField(fld.with_values(fld.values + bump), psi.mass, psi.x0, psi.t)


# ------------------------------------------------------------ level sets

def _hull_band_violations(pts_in: np.ndarray, all_pts: np.ndarray, in_mask: np.ndarray,
                          band: float) -> np.ndarray:
    """Nodes inside the hull of ``pts_in`` but outside the set and farther
    than ``band`` from the hull boundary."""
    if pts_in.shape[0] < 3:
        return np.zeros(0, dtype=int)
    try:
        hull = ConvexHull(pts_in)
    except Exception:  # degenerate (collinear) sets are convex
        return np.zeros(0, dtype=int)
    tri = Delaunay(pts_in[hull.vertices])
    inside = tri.find_simplex(all_pts) >= 0
    cand = np.flatnonzero(inside & ~in_mask)
    if cand.size == 0:
        return cand
    # signed distance to each facet: normal . x + offset <= 0 inside
    eq = hull.equations
    dist = -(all_pts[cand] @ eq[:, :-1].T + eq[:, -1])
    depth = np.min(dist, axis=1)
    return cand[depth > band]


def levelset_convexity(u: GridFunctionND, m: float, x0, t: float, tol: float | None = None,
                       band_cells: float = 1.0) -> Verdict:
    """Is ``A = {rho_m(. - x0, t) - u > tol}`` convex (2-D)?

    ``A`` is compared with the convex hull of its nodes; nodes inside the
    hull but not in ``A`` are allowed only within ``band_cells`` cells of the
    hull boundary.
    """
    if u.n_dim != 2:
        raise ValueError("level-set convexity is implemented in 2-D")
    rho = fundamental_nd(u.axes, m, x0, t)
    e = rho - u.values
    if tol is None:
        tol = 1e-9 * float(np.max(np.abs(e)))
    mask = (e > tol).ravel()
    pts = u.mesh().reshape(-1, 2)
    band = band_cells * max(u.spacing)
    bad = _hull_band_violations(pts[mask], pts, mask, band)
    where = tuple(float(c) for c in pts[bad[0]]) if bad.size else None
    return Verdict(bad.size == 0, float(bad.size), where, band, tol,
                   [("nodes_in_A", int(mask.sum()))], where, int(bad.size))


# ----------------------------------------------------------------- data

def random_initial_data(axes, seed: int, n_bumps=(1, 4), box: float = 2.0) -> GridFunctionND:
    """Nonnegative, compactly supported data: a few ``cos^2`` bumps and
    boxes with random centres, radii and heights inside ``[-box, box]^n``."""
    rng = np.random.default_rng(seed)
    g = GridFunctionND(axes, np.zeros(tuple(a.n + 1 for a in axes)))
    X = g.mesh()
    v = np.zeros(X.shape[:-1])
    for _ in range(int(rng.integers(n_bumps[0], n_bumps[1] + 1))):
        r = float(rng.uniform(0.3, 0.9))
        c = rng.uniform(-box + r, box - r, size=len(axes))
        h = float(rng.uniform(0.5, 2.0))
        if rng.random() < 0.7:
            d = np.sqrt(np.sum((X - c) ** 2, axis=-1)) / r
            v += h * np.where(d < 1, np.cos(0.5 * np.pi * d) ** 2, 0.0)
        else:
            inside = np.all(np.abs(X - c) <= r, axis=-1)
            v += h * inside
    return g.with_values(v, t=0.0)


def two_bumps(axes, sep: float = 3.0, r: float = 0.6) -> GridFunctionND:
    g = GridFunctionND(axes, np.zeros(tuple(a.n + 1 for a in axes)))
    X = g.mesh()
    v = np.zeros(X.shape[:-1])
    for s in (-0.5 * sep, 0.5 * sep):
        c = np.zeros(len(axes))
        c[0] = s
        d = np.sqrt(np.sum((X - c) ** 2, axis=-1)) / r
        v += np.where(d < 1, np.cos(0.5 * np.pi * d) ** 2, 0.0)
    return g.with_values(v, t=0.0)


def lshape_control(axes, m: float, t: float, x0=(0.0, 0.0)) -> GridFunctionND:
    """Negative control for :func:`levelset_convexity`: ``u = rho_m psi``
    with ``psi = 1/2`` on an L-shaped region and ``2`` elsewhere, so that
    ``{rho_m - u > 0}`` is the L."""
    rho = fundamental_nd(axes, m, x0, t)
    g = GridFunctionND(axes, rho)
    X = g.mesh() - np.asarray(x0, dtype=float)
    arm1 = (np.abs(X[..., 0]) <= 2) & (X[..., 1] >= -2) & (X[..., 1] <= -1)
    arm2 = (X[..., 0] >= -2) & (X[..., 0] <= -1) & (np.abs(X[..., 1]) <= 2)
    psi = np.where(arm1 | arm2, 0.5, 2.0)
    return g.with_values(rho * psi, t=t)
