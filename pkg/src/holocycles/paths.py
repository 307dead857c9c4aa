"""Base paths in one coordinate, parametrized over [0, 1]."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import as_complex
from .serialize import complex_to_pair, pair_to_complex


class BasePath:
    """A piecewise-smooth curve ``t -> z(t)``, ``t`` in [0, 1]."""

    def __call__(self, t: float) -> complex:
        raise NotImplementedError

    def deriv(self, t: float) -> complex:
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        """Parameters where the derivative may jump, including 0 and 1."""
        return [0.0, 1.0]

    def reversed(self) -> "BasePath":
        return ReversedPath(self)

    def then(self, other: "BasePath") -> "BasePath":
        return ConcatPath((self, other))

    def sample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        t = np.linspace(0.0, 1.0, n)
        return t, np.array([self(s) for s in t], dtype=complex)

    @staticmethod
    def from_json(data) -> "BasePath":
        """Either ``{"kind": "circle", "turns": k, ...}`` or ``[[t, [re, im]], ...]``."""
        if isinstance(data, dict):
            kind = data.get("kind")
            if kind == "circle":
                return CirclePath(turns=int(data.get("turns", 1)),
                                  center=pair_to_complex(data.get("center", [0.0, 0.0])),
                                  radius=float(data.get("radius", 1.0)),
                                  start_angle=float(data.get("start_angle", 0.0)))
            if kind == "polyline":
                return BasePath.from_json(data["points"])
            raise ValueError(f"$.kind: unknown base path kind {kind!r}")
        if isinstance(data, list):
            try:
                ts = [float(p[0]) for p in data]
                zs = [pair_to_complex(p[1]) for p in data]
            except (TypeError, IndexError, ValueError) as exc:
                raise ValueError(f"$: malformed control point list ({exc})") from exc
            return PolylinePath(ts, zs)
        raise ValueError("$: base path must be an object or a list of control points")


@dataclass(frozen=True)
class CirclePath(BasePath):
    """``center + radius * exp(i (start_angle + 2 pi turns t))``; negative turns run clockwise."""

    turns: int = 1
    center: complex = 0j
    radius: float = 1.0
    start_angle: float = 0.0

    def __call__(self, t):
        return self.center + self.radius * cmath.exp(1j * (self.start_angle + 2 * math.pi * self.turns * t))

    def deriv(self, t):
        return 2j * math.pi * self.turns * (self(t) - self.center)

    def to_json(self):
        return {"kind": "circle", "turns": self.turns, "center": complex_to_pair(self.center),
                "radius": self.radius, "start_angle": self.start_angle}


class PolylinePath(BasePath):
    """Piecewise-linear interpolation of control points ``(t_k, z_k)``."""

    def __init__(self, ts: Sequence[float], zs: Sequence[complex]):
        ts = np.asarray(ts, dtype=float)
        zs = np.asarray([as_complex(z, "control point") for z in zs], dtype=complex)
        if len(ts) < 2 or len(ts) != len(zs):
            raise ValueError("need at least two control points")
        if ts[0] != 0.0 or ts[-1] != 1.0 or np.any(np.diff(ts) <= 0):
            raise ValueError("control parameters must increase from 0 to 1")
        self.ts, self.zs = ts, zs

    def _segment(self, t):
        k = int(np.searchsorted(self.ts, t, side="right")) - 1
        return min(max(k, 0), len(self.ts) - 2)

    def __call__(self, t):
        k = self._segment(t)
        t0, t1 = self.ts[k], self.ts[k + 1]
        return complex(self.zs[k] + (self.zs[k + 1] - self.zs[k]) * (t - t0) / (t1 - t0))

    def deriv(self, t):
        k = self._segment(t)
        return complex((self.zs[k + 1] - self.zs[k]) / (self.ts[k + 1] - self.ts[k]))

    def breakpoints(self):
        return [float(t) for t in self.ts]

    def to_json(self):
        return [[float(t), complex_to_pair(z)] for t, z in zip(self.ts, self.zs)]


@dataclass(frozen=True)
class ConstantPath(BasePath):
    point: complex

    def __call__(self, t):
        return complex(self.point)

    def deriv(self, t):
        return 0j


@dataclass(frozen=True)
class ReversedPath(BasePath):
    path: BasePath

    def __call__(self, t):
        return self.path(1.0 - t)

    def deriv(self, t):
        return -self.path.deriv(1.0 - t)

    def breakpoints(self):
        return sorted(1.0 - b for b in self.path.breakpoints())

    def reversed(self):
        return self.path


class ConcatPath(BasePath):
    """Paths traversed one after another, each over an equal share of [0, 1]."""

    def __init__(self, paths: Sequence[BasePath]):
        flat: list[BasePath] = []
        for p in paths:
            flat.extend(p.paths if isinstance(p, ConcatPath) else [p])
        self.paths = tuple(flat)

    def _locate(self, t):
        k = min(int(t * len(self.paths)), len(self.paths) - 1)
        return k, t * len(self.paths) - k

    def __call__(self, t):
        k, s = self._locate(t)
        return self.paths[k](s)

    def deriv(self, t):
        k, s = self._locate(t)
        return len(self.paths) * self.paths[k].deriv(s)

    def breakpoints(self):
        m = len(self.paths)
        pts = {0.0, 1.0}
        for k, p in enumerate(self.paths):
            pts.update((k + b) / m for b in p.breakpoints())
        return sorted(pts)


class FunctionPath(BasePath):
    """Path given by callables for ``z(t)`` and ``z'(t)``."""

    def __init__(self, func: Callable[[float], complex], deriv: Callable[[float], complex],
                 breaks: Sequence[float] = (0.0, 1.0)):
        self._f, self._df, self._breaks = func, deriv, list(breaks)

    def __call__(self, t):
        return complex(self._f(t))

    def deriv(self, t):
        return complex(self._df(t))

    def breakpoints(self):
        return self._breaks
