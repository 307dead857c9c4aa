"""Leaf transport: lifting base paths to leaves, and holonomy germs.

A foliation is either a :class:`~holocycles.core.PolynomialVectorField`
``(P, Q)`` or a :class:`~holocycles.core.LocalLinearModel`, which is the
field ``(z, lambda w)``.  Over a base path ``t -> x(t)`` the leaf through
``(x(0), w0)`` solves ``dw/dt = Q/P * x'(t)``; the holonomy derivative
solves the variational equation alongside it.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import (DEFAULT_CONFIG, CrossSection, LeafwisePath, LocalLinearModel,
                   NumericConfig, PolynomialVectorField, as_complex, linear_field)
from .errors import AssemblyError, DomainError, NoConvergence, SingularEncounter
from .ode import StepCollapse, Trajectory, dopri5
from .paths import BasePath, CirclePath
from .serialize import complex_to_pair, pair_to_complex

Foliation = Union[PolynomialVectorField, LocalLinearModel]

# |P| below this fraction of max(1, |Q|) means the leaf is at a singular point
SINGULAR_THRESHOLD = 1e-12
_GLOBAL_RETRIES = 4


def as_field(foliation: Foliation) -> PolynomialVectorField:
    if isinstance(foliation, LocalLinearModel):
        return linear_field(1, 0, 0, foliation.lam)
    if isinstance(foliation, PolynomialVectorField):
        return foliation
    raise TypeError(f"not a foliation: {type(foliation).__name__}")


@dataclass(frozen=True)
class LiftResult:
    endpoint: complex
    derivative: complex
    trace: LeafwisePath
    estimated_error: float
    steps: int


class _LeafODE:
    """Right-hand side of the augmented system ``(w, dw/dw0)`` over a base path."""

    def __init__(self, field_: PolynomialVectorField, path: BasePath, base: str):
        self.path = path
        self.swap = base in ("y", "w")
        mons = (field_.q, field_.p) if self.swap else (field_.p, field_.q)
        # in the swapped chart the independent coordinate is y, so exponents swap too
        if self.swap:
            mons = tuple(tuple((j, i, c) for i, j, c in m) for m in mons)
        self.den, self.num = mons
        self.right_edge = 1.0

    def _eval(self, mons, x, y):
        val = 0j
        dy = 0j
        for i, j, c in mons:
            xi = c * x ** i
            val += xi * y ** j
            if j:
                dy += j * xi * y ** (j - 1)
        return val, dy

    def __call__(self, t, state):
        if t >= self.right_edge:
            # left limit at a breakpoint where the derivative may jump
            t_d = np.nextafter(np.nextafter(self.right_edge, -np.inf), -np.inf)
        else:
            t_d = t
        x = self.path(t)
        dx = self.path.deriv(t_d)
        w, v = state[0], state[1]
        P, P_w = self._eval(self.den, x, w)
        Q, Q_w = self._eval(self.num, x, w)
        if abs(P) < SINGULAR_THRESHOLD * max(1.0, abs(Q)):
            raise SingularEncounter(
                f"leaf reaches a zero of the direction denominator at t={t:.6g}, point ({x:.6g}, {w:.6g})")
        slope = Q / P
        slope_w = (Q_w * P - Q * P_w) / (P * P)
        return (slope * dx, slope_w * dx * v)


def lift_path(foliation: Foliation, base_path: BasePath, start, cfg: NumericConfig = DEFAULT_CONFIG,
              base: str = "x") -> LiftResult:
    """Continue the leaf through ``(base_path(0), start)`` along ``base_path``.

    Parameters
    ----------
    foliation : PolynomialVectorField or LocalLinearModel
    base_path : BasePath
        Path of the independent coordinate, ``t`` in [0, 1].
    start : complex
        Transversal coordinate of the initial point.
    cfg : NumericConfig
    base : {"x", "y"}
        Which coordinate the base path moves (``"z"``/``"w"`` are aliases).

    Returns
    -------
    LiftResult
        ``estimated_error`` is the sum of the accepted local error estimates,
        each transported to the endpoint by the variational solution.  The
        integration is repeated with tighter local tolerances until it is at
        most ``ode_rel_tol * |endpoint| + ode_abs_tol``.

    Raises
    ------
    SingularEncounter
        The leaf approaches a point where the leafwise slope is undefined.
    NoConvergence
        Step budget (``cfg.max_iterations``) exhausted or error target unmet.
    """
    if base not in ("x", "y", "z", "w"):
        raise ValueError(f"base must be 'x' or 'y', got {base!r}")
    start = as_complex(start, "start")
    ode = _LeafODE(as_field(foliation), base_path, base)
    breaks = sorted(set(base_path.breakpoints()) | {0.0, 1.0})
    rtol, atol = cfg.ode_rel_tol, cfg.ode_abs_tol
    for _ in range(_GLOBAL_RETRIES + 1):
        traj = Trajectory()
        y0 = (start, 1.0 + 0j)
        for a, b in zip(breaks[:-1], breaks[1:]):
            ode.right_edge = b
            try:
                dopri5(ode, a, b, traj.y[-1] if traj.y else y0, rtol, atol,
                       first_step=cfg.initial_step, max_step=cfg.max_step,
                       max_steps=cfg.max_iterations, traj=traj)
            except StepCollapse as exc:
                # the step size collapses as the slope blows up near a singular point
                raise SingularEncounter(f"leaf runs into a singularity: {exc}") from exc
        ys = np.array(traj.y, dtype=complex)
        errs = np.array(traj.local_error, dtype=float)
        v = ys[:, 1]
        end = complex(ys[-1, 0])
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = np.where(v != 0, np.abs(v[-1] / v), 1.0)
        estimate = float(np.sum(errs[:, 0] * gain))
        target = cfg.ode_rel_tol * abs(end) + cfg.ode_abs_tol
        if estimate <= target:
            break
        shrink = max(0.5 * target / estimate, 1e-3)
        if rtol * shrink < 1e-15:
            raise NoConvergence(
                f"lift error estimate {estimate:.3g} exceeds target {target:.3g} at the precision floor")
        rtol, atol = rtol * shrink, atol * shrink
    else:
        raise NoConvergence(f"lift error estimate {estimate:.3g} exceeds target {target:.3g}")

    t = np.array(traj.t)
    base_vals = np.array([base_path(s) for s in t], dtype=complex)
    # drop duplicated breakpoint samples so parameters stay strictly increasing
    keep = np.concatenate([[True], np.diff(t) > 0])
    if ode.swap:
        z, w = ys[keep, 0], base_vals[keep]
    else:
        z, w = base_vals[keep], ys[keep, 0]
    trace = LeafwisePath(t[keep], z, w)
    return LiftResult(end, complex(ys[-1, 1]), trace, estimate, len(t) - 1)


# ---------------------------------------------------------------------------
# germs


class GermMap:
    """Holomorphic germ on a disc ``|w - anchor| <= domain_radius`` of a cross-section."""

    kind = "abstract"

    def __init__(self, anchor: complex = 0j, domain_radius: float = math.inf):
        self.anchor = as_complex(anchor, "anchor")
        if not domain_radius > 0:
            raise ValueError("domain_radius must be positive")
        self.domain_radius = float(domain_radius)

    def _check(self, w: complex) -> complex:
        w = as_complex(w, "w")
        if abs(w - self.anchor) > self.domain_radius * (1 + 1e-12):
            raise DomainError(f"{w!r} outside the germ domain of radius {self.domain_radius}")
        return w

    def evaluate(self, w) -> tuple[complex, complex]:
        """Value and derivative at ``w``."""
        raise NotImplementedError

    def __call__(self, w) -> complex:
        return self.evaluate(w)[0]

    def deriv(self, w) -> complex:
        return self.evaluate(w)[1]

    def conjugate(self) -> "GermMap":
        """The germ ``w -> conj(M(conj w))`` seen in complex-conjugate coordinates."""
        raise NotImplementedError

    def beta_curve(self, w, samples: int = 65, cfg: NumericConfig = DEFAULT_CONFIG):
        """Leafwise curve realizing this germ from ``(1, w)`` to ``(1, M(w))``.

        Returns ``(t, z, w)`` arrays.  Closed-form germs are realized over the
        loop ``z = 2 - exp(2 pi i t)``, which leaves the closed unit disc for
        ``0 < t < 1``, by the leaf of a linear-fractional Riccati foliation.
        """
        raise AssemblyError(f"germ of kind {self.kind!r} has no leafwise realization")

    def to_json(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_json(data: dict, cfg: NumericConfig = DEFAULT_CONFIG) -> "GermMap":
        kind = data.get("kind")
        c = lambda key: pair_to_complex(data[key])  # noqa: E731
        if kind == "linear":
            return LinearGerm(c("nu"))
        if kind == "affine":
            return AffineGerm(c("a"), c("b"))
        if kind == "moebius":
            return MoebiusGerm(c("a"), c("b"), c("c"), c("d"))
        if kind == "lifted":
            if "field" in data:
                foliation = PolynomialVectorField.from_json(data["field"])
            elif "model" in data:
                foliation = LocalLinearModel.normalized(pair_to_complex(data["model"]["lambda"]))
            else:
                raise ValueError("$.field: lifted germ needs a field or model")
            path = BasePath.from_json(data["path"])
            radius = float(data.get("section_radius", 0.5))
            return LiftedGerm(foliation, path, CrossSection(radius, anchor_w=pair_to_complex(
                data.get("anchor", [0.0, 0.0]))), cfg, base=data.get("base", "x"))
        raise ValueError(f"$.kind: unknown germ kind {kind!r}")

    def __repr__(self):
        return f"{type(self).__name__}({self.to_json()!r})"


STANDARD_LOOP = CirclePath(turns=1, center=2.0 + 0j, radius=1.0, start_angle=math.pi)


def _loop_z(t: np.ndarray) -> np.ndarray:
    return 2.0 - np.exp(2j * math.pi * t)


class AffineGerm(GermMap):
    """``w -> a + b w``."""

    kind = "affine"

    def __init__(self, a, b, anchor: complex = 0j, domain_radius: float = math.inf):
        super().__init__(anchor, domain_radius)
        self.a, self.b = as_complex(a, "a"), as_complex(b, "b")

    def evaluate(self, w):
        w = self._check(w)
        return self.a + self.b * w, self.b

    def conjugate(self):
        return AffineGerm(self.a.conjugate(), self.b.conjugate(),
                          self.anchor.conjugate(), self.domain_radius)

    def beta_curve(self, w, samples=65, cfg=DEFAULT_CONFIG):
        w = self._check(w)
        t = np.linspace(0.0, 1.0, samples)
        if self.b == 1:
            # dy/dx = a / (2 pi i (x - 2)) over the loop
            ws = w + self.a * t
        elif self.b == 0:
            raise AssemblyError("constant germ has no leafwise realization")
        else:
            # dy/dx = mu (y - c) / (x - 2) with exp(2 pi i mu) = b and fixed point c
            mu = cmath.log(self.b) / (2j * math.pi)
            c = self.a / (1 - self.b)
            ws = c + (w - c) * np.exp(2j * math.pi * mu * t)
        return t, _loop_z(t), ws

    def to_json(self):
        return {"kind": "affine", "a": complex_to_pair(self.a), "b": complex_to_pair(self.b)}


class LinearGerm(AffineGerm):
    """``w -> nu w``."""

    kind = "linear"

    def __init__(self, nu, anchor: complex = 0j, domain_radius: float = math.inf):
        super().__init__(0j, nu, anchor, domain_radius)

    @property
    def nu(self) -> complex:
        return self.b

    def conjugate(self):
        return LinearGerm(self.nu.conjugate(), self.anchor.conjugate(), self.domain_radius)

    def to_json(self):
        return {"kind": "linear", "nu": complex_to_pair(self.nu)}


def identity_germ() -> LinearGerm:
    return LinearGerm(1.0)


class MoebiusGerm(GermMap):
    """``w -> (a + b w) / (c + d w)``; ``affine(a, b)`` is ``moebius(a, b, 1, 0)``."""

    kind = "moebius"

    def __init__(self, a, b, c, d, anchor: complex = 0j, domain_radius: float | None = None):
        a, b, c, d = (as_complex(v, n) for v, n in zip((a, b, c, d), "abcd"))
        if b * c - a * d == 0:
            raise ValueError("degenerate Moebius map (b c - a d = 0)")
        if domain_radius is None:
            domain_radius = math.inf if d == 0 else 0.5 * abs(-c / d - as_complex(anchor))
        super().__init__(anchor, domain_radius)
        self.a, self.b, self.c, self.d = a, b, c, d

    def matrix(self) -> np.ndarray:
        return np.array([[self.b, self.a], [self.d, self.c]])

    @classmethod
    def from_matrix(cls, m, anchor=0j, domain_radius=None) -> "MoebiusGerm":
        return cls(m[0, 1], m[0, 0], m[1, 1], m[1, 0], anchor, domain_radius)

    def evaluate(self, w):
        w = self._check(w)
        den = self.c + self.d * w
        if den == 0:
            raise DomainError(f"pole of Moebius germ at {w!r}")
        return (self.a + self.b * w) / den, (self.b * self.c - self.a * self.d) / (den * den)

    def conjugate(self):
        return MoebiusGerm(self.a.conjugate(), self.b.conjugate(), self.c.conjugate(),
                           self.d.conjugate(), self.anchor.conjugate(), self.domain_radius)

    def beta_curve(self, w, samples=65, cfg=DEFAULT_CONFIG):
        w = self._check(w)
        if self.d == 0:
            return AffineGerm(self.a / self.c, self.b / self.c).beta_curve(w, samples, cfg)
        # conjugate to w -> k w by h(w) = (w - f1)/(w - f2) and lift the linear germ
        disc = cmath.sqrt((self.c - self.b) ** 2 + 4 * self.d * self.a)
        f1 = (self.b - self.c + disc) / (2 * self.d)
        f2 = (self.b - self.c - disc) / (2 * self.d)
        if abs(f1 - f2) < 1e-12 * max(1.0, abs(f1)):
            raise AssemblyError("parabolic Moebius germ has no Riccati realization here")
        k = (self.b * self.c - self.a * self.d) / (self.c + self.d * f1) ** 2
        mu = cmath.log(k) / (2j * math.pi)
        t = np.linspace(0.0, 1.0, samples)
        u = (w - f1) / (w - f2) * np.exp(2j * math.pi * mu * t)
        return t, _loop_z(t), (f1 - u * f2) / (1 - u)

    def to_json(self):
        return {"kind": "moebius", **{k: complex_to_pair(getattr(self, k)) for k in "abcd"}}


class LiftedGerm(GermMap):
    """Holonomy of a foliation along a base path, evaluated by :func:`lift_path` on demand."""

    kind = "lifted"

    def __init__(self, foliation: Foliation, path: BasePath, section: CrossSection,
                 cfg: NumericConfig = DEFAULT_CONFIG, base: str = "x"):
        super().__init__(section.anchor_w, section.disc_radius)
        self.foliation, self.path, self.section, self.cfg, self.base = foliation, path, section, cfg, base

    def lift(self, w) -> LiftResult:
        return lift_path(self.foliation, self.path, self._check(w), self.cfg, self.base)

    def evaluate(self, w):
        r = self.lift(w)
        return r.endpoint, r.derivative

    def conjugate(self):
        path = self.path
        conj_path = _ConjugatePath(path)
        if isinstance(self.foliation, LocalLinearModel):
            raise NotImplementedError("lifted germs of the linear model are already normalized")
        section = CrossSection(self.section.disc_radius, self.section.anchor_z.conjugate(),
                               self.section.anchor_w.conjugate())
        return LiftedGerm(self.foliation.conjugate(), conj_path, section, self.cfg, self.base)

    def beta_curve(self, w, samples=65, cfg=None):
        trace = self.lift(w).trace
        return trace.t, trace.z, trace.w

    def to_json(self):
        out = {"kind": "lifted"}
        if isinstance(self.foliation, LocalLinearModel):
            out["model"] = {"lambda": complex_to_pair(self.foliation.lam)}
        else:
            out["field"] = self.foliation.to_json()
        out["path"] = self.path.to_json() if hasattr(self.path, "to_json") else "<callable>"
        out["base"] = self.base
        out["section_radius"] = self.section.disc_radius
        out["anchor"] = complex_to_pair(self.anchor)
        return out


class _ConjugatePath(BasePath):
    def __init__(self, path: BasePath):
        self.path = path

    def __call__(self, t):
        return self.path(t).conjugate()

    def deriv(self, t):
        return self.path.deriv(t).conjugate()

    def breakpoints(self):
        return self.path.breakpoints()


class CompositeGerm(GermMap):
    """``parts[0] o parts[1] o ... o parts[-1]``; the last part is applied first."""

    kind = "composite"

    def __init__(self, parts: Sequence[GermMap]):
        flat: list[GermMap] = []
        for p in parts:
            flat.extend(p.parts if isinstance(p, CompositeGerm) else [p])
        inner = flat[-1]
        super().__init__(inner.anchor, inner.domain_radius)
        self.parts = tuple(flat)

    def evaluate(self, w):
        w = self._check(w)
        d = 1.0 + 0j
        for g in reversed(self.parts):
            w, dg = g.evaluate(w)
            d *= dg
        return w, d

    def conjugate(self):
        return CompositeGerm([g.conjugate() for g in self.parts])

    def to_json(self):
        return {"kind": "composite", "parts": [g.to_json() for g in self.parts]}


def _is_identity(g: GermMap) -> bool:
    return isinstance(g, LinearGerm) and g.nu == 1


def compose(g: GermMap, f: GermMap) -> GermMap:
    """``g o f`` (``f`` first), kept in closed form whenever both factors are.

    Raises
    ------
    DomainError
        If ``f`` maps its anchor outside the domain of ``g``.
    """
    if _is_identity(f) and math.isinf(f.domain_radius):
        return g
    if _is_identity(g) and math.isinf(g.domain_radius):
        return f
    image = f(f.anchor)
    if abs(image - g.anchor) >= g.domain_radius:
        raise DomainError(
            f"image {image!r} of the inner anchor lies outside the outer domain (radius {g.domain_radius})")
    anchor, radius = f.anchor, f.domain_radius
    if isinstance(g, LinearGerm) and isinstance(f, LinearGerm):
        return LinearGerm(g.nu * f.nu, anchor, radius)
    if isinstance(g, AffineGerm) and isinstance(f, AffineGerm):
        return AffineGerm(g.a + g.b * f.a, g.b * f.b, anchor, radius)
    closed = (AffineGerm, MoebiusGerm)
    if isinstance(g, closed) and isinstance(f, closed):
        m = _moebius_matrix(g) @ _moebius_matrix(f)
        return MoebiusGerm.from_matrix(m, anchor, radius)
    return CompositeGerm((g, f))


def _moebius_matrix(g: GermMap) -> np.ndarray:
    if isinstance(g, MoebiusGerm):
        return g.matrix()
    return np.array([[g.b, g.a], [0, 1]], dtype=complex)


def holonomy_germ(foliation: Foliation, base_path: BasePath, section: CrossSection,
                  cfg: NumericConfig = DEFAULT_CONFIG, base: str = "x") -> LiftedGerm:
    """Holonomy along ``base_path`` on the disc of ``section``.

    The lift through the section anchor is carried out once to check the
    germ is defined; the returned germ recomputes lifts on every call.
    """
    germ = LiftedGerm(foliation, base_path, section, cfg, base)
    germ.lift(section.anchor_w)
    return germ
