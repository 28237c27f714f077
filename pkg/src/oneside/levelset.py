"""Sign patterns of ``e = rho - u`` and what can be read off them.

A positivity set is *connectable* when it can be made connected by adding
zeros of ``e``; on a grid that is the absence of a ``+, -, +`` subsequence
once the zero entries are dropped.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridFunction1D, _same_grid

PLUS, ZERO, MINUS = 1, 0, -1
_SYM = {PLUS: "+", ZERO: "0", MINUS: "-"}


@dataclass(frozen=True, eq=False)
class SignPattern:
    signs: np.ndarray
    tol: float
    x: np.ndarray | None = None

    def __post_init__(self):
        s = np.asarray(self.signs, dtype=np.int8)
        s.setflags(write=False)
        object.__setattr__(self, "signs", s)
        if self.x is None:
            object.__setattr__(self, "x", np.arange(s.size, dtype=float))

    def reduced(self) -> np.ndarray:
        """Signs with the zero entries deleted."""
        return self.signs[self.signs != ZERO]

    def __str__(self):
        return "".join(_SYM[int(v)] for v in self.signs)

    @classmethod
    def from_string(cls, text: str, tol: float = 0.0) -> "SignPattern":
        table = {"+": PLUS, "0": ZERO, "-": MINUS}
        return cls(np.array([table[ch] for ch in text if ch in table]), tol)


def sign_pattern(e: GridFunction1D, tol: float) -> SignPattern:
    """``+`` where ``e > tol``, ``-`` where ``e < -tol``, else ``0``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    v = e.values
    signs = np.where(v > tol, PLUS, np.where(v < -tol, MINUS, ZERO))
    return SignPattern(signs, tol, e.x)


def default_tol(e: GridFunction1D, rel: float = 1e-6) -> float:
    """``rel * max|e|`` with a floor so that ``e = 0`` still gets a positive band."""
    return rel * max(float(np.max(np.abs(e.values))), 1e-300)


@dataclass(frozen=True)
class ConnectabilityReport:
    connectable: bool
    plus_components: int
    witness: tuple | None
    tol: float

    def row(self, **params) -> dict:
        w = self.witness or (None, None, None)
        return {**params, "connectable": self.connectable, "components": self.plus_components,
                "witness_x1": w[0], "witness_x2": w[1], "witness_x3": w[2]}


def _runs(mask: np.ndarray):
    """``(start, stop)`` index pairs of the maximal True runs of ``mask``."""
    m = np.concatenate(([False], mask, [False])).astype(np.int8)
    d = np.diff(m)
    return list(zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)))


def is_connectable(s: SignPattern) -> ConnectabilityReport:
    """Scan for the first ``+ ... - ... +`` triple (zeros skipped)."""
    signs = s.signs
    comps = len(_runs(signs == PLUS))
    pos = np.flatnonzero(signs == PLUS)
    if pos.size < 2:
        return ConnectabilityReport(True, comps, None, s.tol)
    i1 = pos[0]
    neg = np.flatnonzero(signs[i1:] == MINUS)
    if neg.size:
        i2 = i1 + neg[0]
        later = pos[pos > i2]
        if later.size:
            x = s.x
            return ConnectabilityReport(False, comps, (float(x[i1]), float(x[i2]),
                                                       float(x[later[0]])), s.tol)
    return ConnectabilityReport(True, comps, None, s.tol)


def sign_change_count(s: SignPattern) -> int:
    r = s.reduced()
    if r.size < 2:
        return 0
    return int(np.count_nonzero(r[1:] != r[:-1]))


def monotonicity_changes(u, tol: float | None = None) -> int:
    """Direction reversals of the differences that exceed ``tol``.

    Differences with ``|du| <= tol`` (plateaus and round-off) are ignored.
    The default tolerance is ``1e-9 * max|u|``.
    """
    vals = np.asarray(u.values if isinstance(u, GridFunction1D) else u, dtype=float)
    if tol is None:
        tol = 1e-9 * float(np.max(np.abs(vals), initial=0.0))
    d = np.diff(vals)
    s = np.sign(d[np.abs(d) > tol])
    if s.size < 2:
        return 0
    return int(np.count_nonzero(s[1:] != s[:-1]))


# ---------------------------------------------------------------- steepness

SCENARIOS = ("a", "b", "c", "d")


@dataclass(frozen=True)
class Intersection:
    a: float
    b: float
    case: int            # 1: both increasing left of a; 2: both decreasing right of b
    scenario: str        # a..d, in the orientation of ``case``
    violation: bool
    small_m: bool        # (b)/(c) conclusion failed while max rho < max u


@dataclass(frozen=True)
class SteepnessReport:
    intersections: list = field(default_factory=list)
    tol: float = 0.0
    max_rho: float = 0.0
    max_u: float = 0.0

    @property
    def violations(self) -> list:
        return [it for it in self.intersections if it.violation]

    @property
    def scenario_counts(self) -> dict:
        out = {k: 0 for k in SCENARIOS}
        for it in self.intersections:
            out[it.scenario] += 1
        return out

    def flags(self) -> str:
        c = self.scenario_counts
        return ";".join(f"{k}={c[k]}" for k in SCENARIOS) + f";violations={len(self.violations)}"


def _intervals(e: np.ndarray, tol: float):
    """Maximal index intervals ``[ia, ib]`` where graphs meet.

    A node meets when ``|e| <= tol``; a cell meets when ``e`` changes strict
    sign across it (the value ranges of the two one-sided limits overlap).
    """
    meet = np.abs(e) <= tol
    flip = np.flatnonzero((e[:-1] * e[1:] < 0) & ~meet[:-1] & ~meet[1:])
    mark = meet.copy()
    mark[flip] = True
    mark[flip + 1] = True
    return [(int(s), int(t) - 1) for s, t in _runs(mark)]


def _window_sign(e: np.ndarray, tol: float) -> int:
    """``+1`` when u > rho on the whole window, ``-1`` when u < rho, else 0."""
    if e.size == 0:
        return 0
    if np.all(e < -tol):
        return 1
    if np.all(e > tol):
        return -1
    return 0


def _rising(v: np.ndarray, tol: float) -> bool:
    d = np.diff(v)
    return d.size > 0 and bool(np.all(d >= -tol)) and float(np.sum(d)) > tol


def _classify(left: int, right: int) -> str:
    # orientation: "left" is the side where both graphs rise towards the point
    if left == 1 and right == -1:
        return "a"
    if left == 1 and right == 1:
        return "b"
    if left == -1 and right == 1:
        return "c"
    return "d"


def steepness_classify(u: GridFunction1D, rho: GridFunction1D, t: float | None = None,
                       tol: float | None = None, delta: float | None = None) -> SteepnessReport:
    """Classify every intersection of ``u`` and the shifted fundamental ``rho``.

    Windows of width ``delta`` (default five cells) on each side of an
    intersection interval ``[a, b]`` decide the local picture. Scenario
    (d) is always a violation; (b) and (c) are violations when the required
    conclusion (``rho <= u + tol`` on the far side) fails and ``max rho >=
    max u``, otherwise they are recorded as small-mass occurrences.
    """
    _same_grid(u, rho)
    e = rho.values - u.values
    uv, rv = u.values, rho.values
    scale = max(float(np.max(np.abs(uv))), float(np.max(np.abs(rv))), 1e-300)
    if tol is None:
        tol = 1e-6 * scale
    dx = u.grid.dx
    k = max(1, int(round((delta if delta is not None else 5 * dx) / dx)))
    n = e.size
    big_m = float(np.max(rv)) >= float(np.max(uv))
    out = []
    x = u.x
    for ia, ib in _intervals(e, tol):
        if ia - k < 0 or ib + k >= n:
            continue
        lw = slice(ia - k, ia)
        rw = slice(ib + 1, ib + 1 + k)
        s_left = _window_sign(e[lw], tol)
        s_right = _window_sign(e[rw], tol)
        if s_left == 0 or s_right == 0:
            continue
        cases = []
        if _rising(uv[ia - k:ia + 1], tol) and _rising(rv[ia - k:ia + 1], tol):
            cases.append((1, _classify(s_left, s_right), slice(ib + 1, n)))
        if _rising(uv[ib:ib + k + 1][::-1], tol) and _rising(rv[ib:ib + k + 1][::-1], tol):
            cases.append((2, _classify(s_right, s_left), slice(0, ia)))
        for case, scen, far in cases:
            violation = small = False
            if scen == "d":
                violation = True
            elif scen in ("b", "c"):
                holds = bool(np.all(rv[far] <= uv[far] + tol))
                if not holds:
                    violation, small = (True, False) if big_m else (False, True)
            out.append(Intersection(float(x[ia]), float(x[ib]), case, scen, violation, small))
    return SteepnessReport(out, tol, float(np.max(rv)), float(np.max(uv)))
