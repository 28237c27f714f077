"""Flat ``key = value`` configuration files.

Lines starting with ``#`` are comments; dotted keys (``grid.n``) group
related settings. Values are kept as text until a typed getter asks for
them, and every problem found while reading is reported in one error.
"""
from __future__ import annotations

from pathlib import Path

from .solver import SolverConfig


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def parse_text(text: str, source: str = "<string>") -> dict:
    out = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"{source}:{lineno}: expected key = value")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            problems.append(f"{source}:{lineno}: empty key")
        elif key in out:
            problems.append(f"{source}:{lineno}: duplicate key {key!r}")
        else:
            out[key] = value
    if problems:
        raise ConfigError(problems)
    return out


def read_config(path) -> dict:
    path = Path(path)
    return parse_text(path.read_text(encoding="utf-8"), str(path))


def echo(cfg: dict) -> str:
    """Canonical text form (sorted keys), used for provenance in reports."""
    return "".join(f"{k} = {cfg[k]}\n" for k in sorted(cfg))


def _to_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(text)


class Reader:
    """Typed access to a parsed config that accumulates errors."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.problems = []
        self.used = set()

    def _raw(self, key, default, required):
        self.used.add(key)
        if key not in self.cfg:
            if required:
                self.problems.append(f"missing required key {key!r}")
            return None if default is None else default
        return self.cfg[key]

    def _conv(self, key, raw, fn, kind):
        if not isinstance(raw, str):
            return raw
        try:
            return fn(raw)
        except ValueError:
            self.problems.append(f"key {key!r}: cannot read {raw!r} as {kind}")
            return None

    def str(self, key, default=None, required=False, choices=None):
        val = self._raw(key, default, required)
        if val is not None and choices is not None and val not in choices:
            self.problems.append(f"key {key!r}: {val!r} not one of {sorted(choices)}")
        return val

    def float(self, key, default=None, required=False):
        return self._conv(key, self._raw(key, default, required), float, "a number")

    def int(self, key, default=None, required=False):
        return self._conv(key, self._raw(key, default, required), int, "an integer")

    def floats(self, key, default=None, required=False):
        raw = self._raw(key, default, required)
        return self._conv(key, raw, lambda s: tuple(float(v) for v in s.replace(",", " ").split()),
                          "a list of numbers")

    def bool(self, key, default=None, required=False):
        raw = self._raw(key, default, required)
        return self._conv(key, raw, _to_bool, "a boolean")

    def check(self):
        if self.problems:
            raise ConfigError(self.problems)


def solver_config(cfg: dict, reader: Reader | None = None, **defaults) -> SolverConfig:
    """Build a :class:`SolverConfig` from ``grid.*``, ``cfl``, ``eps_list``,
    ``bump_width``, ``z_floor`` and ``t_out`` keys."""
    r = reader or Reader(cfg)
    base = SolverConfig(**defaults)
    sc = SolverConfig(
        n=r.int("grid.n", base.n),
        radius=r.float("grid.radius", base.radius),
        center=r.float("grid.center", base.center),
        cfl=r.float("cfl", base.cfl),
        eps_list=r.floats("eps_list", base.eps_list),
        bump_width=r.float("bump_width", base.bump_width),
        z_floor=r.float("z_floor", base.z_floor),
        t_out=r.floats("t_out", base.t_out),
    )
    if reader is None:
        r.check()
    return sc
