"""Foundational types: polynomial fields, linear models, sections, paths.

Complex scalars are plain Python ``complex`` values.  Public entry points
run them through :func:`as_complex`, which rejects NaN and infinity.

The local model follows the convention ``z dw = lambda w dz``, so the
holonomy along the unit circle in the separatrix ``w = 0`` is
``w -> nu w`` with ``nu = exp(2 pi i lambda)``.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateField, NotComplexHyperbolic

TWO_PI_I = 2j * math.pi

# |Im(ratio)| must exceed this fraction of |ratio| for "not real"
RATIO_IMAG_TOL = 1e-9


def as_complex(value, name: str = "value") -> complex:
    """Coerce to ``complex`` and reject non-finite components."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        value = complex(float(value[0]), float(value[1]))
    c = complex(value)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError(f"{name} must be finite, got {c!r}")
    return c


@dataclass(frozen=True)
class NumericConfig:
    """Tolerances and iteration budgets shared by every stage."""

    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12
    fixed_point_tol: float = 1e-13
    max_iterations: int = 20000
    boundary_samples: int = 128
    quadrature_points: int = 2048
    initial_step: float = 1e-3
    max_step: float = 5e-2
    spiral_density: int = 256

    def __post_init__(self):
        for name in ("ode_rel_tol", "ode_abs_tol", "fixed_point_tol",
                     "max_iterations", "boundary_samples",
                     "quadrature_points", "initial_step", "max_step", "spiral_density"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        for name in ("max_iterations", "boundary_samples", "quadrature_points", "spiral_density"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ValueError(f"{name} must be an integer")

    def replace(self, **changes) -> "NumericConfig":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return NumericConfig(**values)


DEFAULT_CONFIG = NumericConfig()


# ---------------------------------------------------------------------------
# scalar operations


class Orientation(NamedTuple):
    lam: complex
    conjugated: bool


def normalize_orientation(lam) -> Orientation:
    """Return ``lambda`` with positive imaginary part.

    If ``Im lambda < 0`` the conjugate is returned and ``conjugated`` is set;
    every other coordinate of the problem must then be conjugated as well.
    """
    lam = as_complex(lam, "lambda")
    if abs(lam.imag) <= RATIO_IMAG_TOL * abs(lam):
        raise NotComplexHyperbolic(f"eigenvalue ratio {lam!r} is real")
    if lam.imag > 0:
        return Orientation(lam, False)
    return Orientation(lam.conjugate(), True)


def nu_from_lambda(lam) -> complex:
    """Multiplier ``exp(2 pi i lambda)`` of the loop around the singular point."""
    lam = as_complex(lam, "lambda")
    return cmath.exp(TWO_PI_I * lam)


def log_abs_nu(lam) -> float:
    """``log |nu| = -2 pi Im(lambda)``, exact without forming ``nu``."""
    return -2.0 * math.pi * as_complex(lam, "lambda").imag


class Hyperbolicity(NamedTuple):
    hyperbolic: bool
    ratio: complex | None
    eigenvalues: tuple[complex, complex]


def is_complex_hyperbolic(jacobian, denominator: complex | None = None,
                          eig_tol: float = 1e-12) -> Hyperbolicity:
    """Classify a 2x2 linear part.

    Parameters
    ----------
    jacobian : array_like, shape (2, 2)
    denominator : complex, optional
        Eigenvalue to put in the denominator of the ratio.  The eigenvalue
        closest to it is used.  By default the first eigenvalue returned by
        ``numpy.linalg.eigvals`` is the denominator, which for a diagonal
        matrix is the top-left entry.
    eig_tol : float
        An eigenvalue with modulus below ``eig_tol * max(1, ||J||)`` counts
        as zero.

    Returns
    -------
    Hyperbolicity
        ``ratio`` is the eigenvalue ratio whenever both eigenvalues are
        nonzero, even if the verdict is false.
    """
    J = np.asarray(jacobian, dtype=complex)
    if J.shape != (2, 2) or not np.all(np.isfinite(J)):
        return Hyperbolicity(False, None, (0j, 0j))
    e1, e2 = (complex(e) for e in np.linalg.eigvals(J))
    if denominator is not None and abs(e2 - denominator) < abs(e1 - denominator):
        e1, e2 = e2, e1
    scale = max(1.0, float(np.linalg.norm(J)))
    if abs(e1) <= eig_tol * scale or abs(e2) <= eig_tol * scale:
        return Hyperbolicity(False, None, (e1, e2))
    ratio = e2 / e1
    return Hyperbolicity(abs(ratio.imag) > RATIO_IMAG_TOL * abs(ratio), ratio, (e1, e2))


# ---------------------------------------------------------------------------
# polynomial vector fields

Monomial = tuple[int, int, complex]


def _clean_monomials(monomials) -> tuple[Monomial, ...]:
    acc: dict[tuple[int, int], complex] = {}
    for i, j, c in monomials:
        i, j = int(i), int(j)
        if i < 0 or j < 0:
            raise ValueError("monomial exponents must be non-negative")
        acc[(i, j)] = acc.get((i, j), 0j) + as_complex(c, "coefficient")
    return tuple(sorted((i, j, c) for (i, j), c in acc.items() if c != 0))


def _eval(monomials: Sequence[Monomial], x: complex, y: complex) -> complex:
    return sum(c * x ** i * y ** j for i, j, c in monomials)


@dataclass(frozen=True)
class PolynomialVectorField:
    """``xdot = P(x, y)``, ``ydot = Q(x, y)`` with complex coefficients.

    Monomials are ``(i, j, c)`` meaning ``c x**i y**j``.  Repeated exponents
    are summed and zero coefficients dropped on construction.
    """

    p: tuple[Monomial, ...]
    q: tuple[Monomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "p", _clean_monomials(self.p))
        object.__setattr__(self, "q", _clean_monomials(self.q))
        if not self.p and not self.q:
            raise ValueError("vector field has no nonzero monomial")

    @property
    def degree(self) -> int:
        return max(i + j for i, j, _ in self.p + self.q)

    def __call__(self, x: complex, y: complex) -> tuple[complex, complex]:
        return _eval(self.p, x, y), _eval(self.q, x, y)

    def jacobian(self, x: complex, y: complex) -> np.ndarray:
        def partials(mons):
            dx = sum(c * i * x ** (i - 1) * y ** j for i, j, c in mons if i)
            dy = sum(c * j * x ** i * y ** (j - 1) for i, j, c in mons if j)
            return dx, dy

        return np.array([partials(self.p), partials(self.q)], dtype=complex)

    def homogeneous_part(self, d: int) -> tuple[tuple[Monomial, ...], tuple[Monomial, ...]]:
        return (tuple(m for m in self.p if m[0] + m[1] == d),
                tuple(m for m in self.q if m[0] + m[1] == d))

    def conjugate(self) -> "PolynomialVectorField":
        return PolynomialVectorField(
            tuple((i, j, c.conjugate()) for i, j, c in self.p),
            tuple((i, j, c.conjugate()) for i, j, c in self.q))

    @classmethod
    def from_json(cls, data: dict) -> "PolynomialVectorField":
        from .serialize import pair_to_complex

        def mons(key):
            if key not in data:
                raise KeyError(f"$.{key}: missing")
            out = []
            for k, m in enumerate(data[key]):
                try:
                    out.append((int(m["i"]), int(m["j"]), pair_to_complex(m["c"])))
                except (KeyError, TypeError, ValueError) as exc:
                    raise ValueError(f"$.{key}[{k}]: {exc}") from exc
            return out

        return cls(mons("p"), mons("q"))

    def to_json(self) -> dict:
        from .serialize import complex_to_pair

        return {key: [{"i": i, "j": j, "c": complex_to_pair(c)} for i, j, c in mons]
                for key, mons in (("p", self.p), ("q", self.q))}


def linear_field(a, b, c, d) -> PolynomialVectorField:
    """``xdot = a x + b y``, ``ydot = c x + d y``."""
    return PolynomialVectorField([(1, 0, a), (0, 1, b)], [(1, 0, c), (0, 1, d)])


# ---------------------------------------------------------------------------
# local model, cross-section, leafwise paths


@dataclass(frozen=True)
class LocalLinearModel:
    """Linearization chart ``z dw = lambda w dz`` on a bidisc.

    Internally the bidisc is the unit bidisc; ``z_radius`` and ``w_radius``
    record its size in the ambient chart so that curves can be mapped back.
    """

    lam: complex
    z_radius: float = 1.0
    w_radius: float = 1.0
    conjugated: bool = False

    def __post_init__(self):
        lam = as_complex(self.lam, "lambda")
        if lam.imag <= 0:
            raise NotComplexHyperbolic(
                f"model needs Im(lambda) > 0, got {lam!r}; use LocalLinearModel.normalized")
        object.__setattr__(self, "lam", lam)
        if not (self.z_radius > 0 and self.w_radius > 0):
            raise ValueError("bidisc radii must be positive")

    @classmethod
    def normalized(cls, lam, z_radius: float = 1.0, w_radius: float = 1.0) -> "LocalLinearModel":
        lam, conj = normalize_orientation(lam)
        return cls(lam, z_radius, w_radius, conj)

    @property
    def nu(self) -> complex:
        return nu_from_lambda(self.lam)

    @property
    def log_abs_nu(self) -> float:
        return log_abs_nu(self.lam)

    def to_ambient(self, z, w):
        return np.asarray(z) * self.z_radius, np.asarray(w) * self.w_radius

    def to_json(self) -> dict:
        from .serialize import complex_to_pair

        return {"lambda": complex_to_pair(self.lam), "nu": complex_to_pair(self.nu),
                "z_radius": self.z_radius, "w_radius": self.w_radius,
                "conjugated": self.conjugated}


@dataclass(frozen=True)
class CrossSection:
    """Disc ``D`` in the transversal ``T = {z = anchor_z}`` centred at ``anchor_w``."""

    disc_radius: float
    anchor_z: complex = 1.0 + 0j
    anchor_w: complex = 0j

    def __post_init__(self):
        if not self.disc_radius > 0:
            raise ValueError("disc_radius must be positive")

    @classmethod
    def for_model(cls, model: LocalLinearModel, disc_radius: float) -> "CrossSection":
        # internal coordinates: the model's w-radius is 1
        if disc_radius > 1.0:
            raise ValueError(f"disc radius {disc_radius} exceeds the bidisc w-radius")
        return cls(disc_radius)


@dataclass(frozen=True)
class LeafwisePath:
    """Sampled leafwise path ``t -> (z(t), w(t))`` with ``t`` running over [0, 1]."""

    t: np.ndarray
    z: np.ndarray
    w: np.ndarray
    exterior: np.ndarray = field(default=None)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        z = np.asarray(self.z, dtype=complex)
        w = np.asarray(self.w, dtype=complex)
        if not (t.shape == z.shape == w.shape) or t.ndim != 1 or len(t) < 2:
            raise ValueError("t, z, w must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(t) <= 0):
            raise ValueError("path parameters must be strictly increasing")
        if not (math.isclose(t[0], 0.0, abs_tol=1e-12) and math.isclose(t[-1], 1.0, abs_tol=1e-12)):
            raise ValueError("path parameters must run from 0 to 1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)
        if self.exterior is None:
            object.__setattr__(self, "exterior", outside_closed_bidisc(z, w))

    def __len__(self):
        return len(self.t)

    @property
    def start(self) -> tuple[complex, complex]:
        return complex(self.z[0]), complex(self.w[0])

    @property
    def end(self) -> tuple[complex, complex]:
        return complex(self.z[-1]), complex(self.w[-1])

    def interior_exterior(self) -> bool:
        """True iff every sample strictly between the endpoints lies outside the closed bidisc."""
        return bool(np.all(self.exterior[1:-1]))


def outside_closed_bidisc(z, w, tol: float = 0.0):
    return np.maximum(np.abs(z), np.abs(w)) > 1.0 + tol


# ---------------------------------------------------------------------------
# singular points


class SingularPoint(NamedTuple):
    x: complex
    y: complex
    jacobian: np.ndarray
    hyperbolic: bool
    ratio: complex | None
    residual: float


def _newton_zero(field_: PolynomialVectorField, x: complex, y: complex,
                 iters: int = 80) -> tuple[complex, complex, float]:
    """Damped Gauss-Newton on ``(P, Q) = 0``; least-squares steps survive singular Jacobians."""
    P, Q = field_(x, y)
    res = abs(P) + abs(Q)
    for _ in range(iters):
        if res == 0.0:
            break
        J = field_.jacobian(x, y)
        step = np.linalg.lstsq(J, -np.array([P, Q]), rcond=None)[0]
        damping = 1.0
        while damping > 1e-6:
            xn, yn = x + damping * step[0], y + damping * step[1]
            Pn, Qn = field_(xn, yn)
            resn = abs(Pn) + abs(Qn)
            if math.isfinite(resn) and resn < res:
                break
            damping *= 0.5
        else:
            break
        x, y, P, Q, res = xn, yn, Pn, Qn, resn
    return complex(x), complex(y), res


def singular_points(field_: PolynomialVectorField, box: float = 2.0, grid: int = 4,
                    residual_tol: float = 1e-10, dedup: float = 1e-8) -> list[SingularPoint]:
    """Isolated common zeros of ``P`` and ``Q`` with real and imaginary parts in ``[-box, box]``.

    Damped Newton is started from a ``grid**4`` lattice over the box.
    Converged zeros are deduplicated at ``dedup`` separation.

    Raises
    ------
    DegenerateField
        If a zero lies on a curve of zeros (``P`` and ``Q`` share a factor).
    """
    ticks = np.linspace(-box, box, grid)
    found: list[tuple[complex, complex, float]] = []
    for xr, xi, yr, yi in itertools.product(ticks, repeat=4):
        x, y, res = _newton_zero(field_, complex(xr, xi), complex(yr, yi))
        if res > residual_tol:
            continue
        if max(abs(x.real), abs(x.imag), abs(y.real), abs(y.imag)) > box * (1 + 1e-9):
            continue
        if any(abs(x - fx) + abs(y - fy) < dedup for fx, fy, _ in found):
            continue
        if _on_zero_curve(field_, x, y):
            raise DegenerateField(
                f"zero locus is not isolated near ({x:.6g}, {y:.6g}): P and Q share a factor")
        found.append((x, y, res))

    points = []
    for x, y, res in sorted(found, key=lambda p: (round(p[0].real, 8), round(p[0].imag, 8),
                                                    round(p[1].real, 8), round(p[1].imag, 8))):
        J = field_.jacobian(x, y)
        h = is_complex_hyperbolic(J)
        points.append(SingularPoint(x, y, J, h.hyperbolic, h.ratio, res))
    return points


def _on_zero_curve(field_: PolynomialVectorField, x: complex, y: complex,
                   delta: float = 1e-4) -> bool:
    J = field_.jacobian(x, y)
    s = np.linalg.svd(J, compute_uv=False)
    if s[-1] > 1e-8 * max(1.0, s[0]):
        return False
    # step along the kernel and project back; a curve of zeros keeps us away
    kernel = np.linalg.svd(J)[2].conj()[-1]
    for sign in (1.0, -1.0):
        xs, ys = x + sign * delta * kernel[0], y + sign * delta * kernel[1]
        xp, yp, res = _newton_zero(field_, xs, ys, iters=200)
        if res < 1e-12 and abs(xp - x) + abs(yp - y) > 0.1 * delta:
            return True
    return False
