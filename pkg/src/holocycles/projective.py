"""Polynomial foliations seen in the projective plane.

A degree ``n`` field with top homogeneous part ``(P_n, Q_n)`` extends to
``CP^2``.  In the chart ``u = y/x, v = 1/x`` (after multiplying by
``v**(n-1)``) the extension reads ``u' = Q~ - u P~``, ``v' = -v P~`` with
``P~(u, v) = sum_k P_k(1, u) v**(n-k)``; the line at infinity ``v = 0`` is
invariant unless ``x Q_n - y P_n`` vanishes identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .core import (DEFAULT_CONFIG, NumericConfig, PolynomialVectorField, as_complex,
                   is_complex_hyperbolic)
from .errors import InvariantLine, NotInvariantLine
from .forge import find_fixed_point
from .transport import GermMap

ROOT_CLUSTER = 1e-6
ZERO_COEFF = 1e-13


def _restricted(mons, d: int, dehom: str) -> np.ndarray:
    """Ascending coefficients of ``F_d(1, u)`` (``dehom='x'``) or ``F_d(s, 1)`` (``'y'``)."""
    c = np.zeros(d + 1, dtype=complex)
    for i, j, coef in mons:
        if i + j == d:
            c[j if dehom == "x" else i] += coef
    return c


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    scale = np.abs(c).max() if len(c) else 0.0
    k = len(c)
    while k > 0 and abs(c[k - 1]) <= ZERO_COEFF * scale:
        k -= 1
    return c[:k]


def _direction_poly(field: PolynomialVectorField, dehom: str) -> np.ndarray:
    """``h(u) = Q_n(1,u) - u P_n(1,u)`` or ``g(s) = P_n(s,1) - s Q_n(s,1)``, ascending."""
    n = field.degree
    pn, qn = _restricted(field.p, n, dehom), _restricted(field.q, n, dehom)
    if dehom == "x":
        return npoly.polysub(np.append(qn, 0), npoly.polymulx(pn))
    return npoly.polysub(np.append(pn, 0), npoly.polymulx(qn))


def _chart_field(field: PolynomialVectorField, dehom: str):
    """Callable ``(a, v) -> (a', v')`` and its Jacobian for one infinity chart."""
    n = field.degree
    main, other = (field.q, field.p) if dehom == "x" else (field.p, field.q)
    polys_main = [_restricted(main, k, dehom) for k in range(n + 1)]
    polys_other = [_restricted(other, k, dehom) for k in range(n + 1)]

    def tilde(polys, a, v):
        val = 0j
        da = 0j
        dv = 0j
        for k, c in enumerate(polys):
            pk = npoly.polyval(a, c)
            dpk = npoly.polyval(a, npoly.polyder(c)) if len(c) > 1 else 0j
            val += pk * v ** (n - k)
            da += dpk * v ** (n - k)
            if n - k >= 1:
                dv += pk * (n - k) * v ** (n - k - 1)
        return val, da, dv

    def jac(a, v):
        m, m_a, m_v = tilde(polys_main, a, v)
        o, o_a, o_v = tilde(polys_other, a, v)
        # a' = m - a o, v' = -v o
        return np.array([[m_a - o - a * o_a, m_v - a * o_v],
                         [-v * o_a, -o - v * o_v]], dtype=complex)

    return jac


@dataclass(frozen=True)
class InfinitySingularity:
    """Singular point of the extended foliation on the line at infinity.

    ``direction`` is the homogeneous pair ``(X, Y)`` of the point ``[X:Y:0]``;
    ``chart`` is ``'u'`` (``u = y/x``) or ``'s'`` (``s = x/y``) and
    ``coordinate`` its value there.  ``lambda_j`` is the transversal
    eigenvalue divided by the eigenvalue along the line at infinity.
    """

    direction: tuple[complex, complex]
    chart: str
    coordinate: complex
    multiplicity: int
    jacobian: np.ndarray | None
    lambda_j: complex | None
    hyperbolic: bool

    @property
    def generic(self) -> bool:
        return self.multiplicity == 1

    def to_json(self) -> dict:
        from .serialize import complex_to_pair

        return {"direction": [complex_to_pair(self.direction[0]), complex_to_pair(self.direction[1])],
                "chart": self.chart, "coordinate": complex_to_pair(self.coordinate),
                "multiplicity": self.multiplicity,
                "lambda": None if self.lambda_j is None else complex_to_pair(self.lambda_j),
                "lambda_convention": "transversal / along-infinity",
                "hyperbolic": self.hyperbolic}


def _polish(c: np.ndarray, r: complex, steps: int = 4) -> complex:
    dc = npoly.polyder(c)
    for _ in range(steps):
        d = npoly.polyval(r, dc)
        if d == 0:
            break
        step = npoly.polyval(r, c) / d
        r = r - step
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            break
    return complex(r)


def _clusters(roots: np.ndarray) -> list[tuple[complex, int]]:
    left = list(roots)
    out = []
    while left:
        r = left.pop(0)
        group = [r] + [s for s in left if abs(s - r) <= ROOT_CLUSTER * (1 + abs(r))]
        for s in group[1:]:
            left.remove(s)
        out.append((complex(np.mean(group)), len(group)))
    return out


def characteristic_number(field: PolynomialVectorField, coordinate, chart: str = "u") -> complex | None:
    """``lambda_j`` at the point of the given chart coordinate on the line at infinity."""
    dehom = "x" if chart == "u" else "y"
    n = field.degree
    a = as_complex(coordinate)
    dirpoly = _direction_poly(field, dehom)
    along = npoly.polyval(a, npoly.polyder(dirpoly))
    other = field.p if dehom == "x" else field.q
    transversal = -npoly.polyval(a, _restricted(other, n, dehom))
    if along == 0:
        return None
    return complex(transversal / along)


def infinity_singularities(field: PolynomialVectorField) -> list[InfinitySingularity]:
    """Singular points on the line at infinity, with multiplicity.

    Roots of ``h(u)`` give the points ``[1:u:0]``; the point ``[0:1:0]``
    carries multiplicity ``n + 1 - deg h``.  Multiplicities add up to
    ``n + 1``.  Multiple roots are reported once, with ``lambda_j`` None.

    Raises
    ------
    NotInvariantLine
        ``x Q_n - y P_n`` vanishes identically (dicritical at infinity).
    """
    n = field.degree
    h = _trim(_direction_poly(field, "x"))
    if len(h) == 0:
        raise NotInvariantLine("x Q_n - y P_n vanishes identically; the line at infinity is not invariant")
    out: list[InfinitySingularity] = []
    jac_u = _chart_field(field, "x")
    if len(h) > 1:
        raw = np.roots(h[::-1])
        for r, m in _clusters(raw):
            if m == 1:
                r = _polish(h, r)
            J = jac_u(r, 0j)
            lam = characteristic_number(field, r, "u") if m == 1 else None
            hyp = lam is not None and is_complex_hyperbolic(J, denominator=J[0, 0]).hyperbolic
            out.append(InfinitySingularity((1.0 + 0j, r), "u", r, m, J, lam, bool(hyp)))
    m_inf = n + 1 - (len(h) - 1)
    if m_inf > 0:
        J = _chart_field(field, "y")(0j, 0j)
        lam = characteristic_number(field, 0j, "s") if m_inf == 1 else None
        hyp = lam is not None and is_complex_hyperbolic(J, denominator=J[0, 0]).hyperbolic
        out.append(InfinitySingularity((0j, 1.0 + 0j), "s", 0j, m_inf, J, lam, bool(hyp)))
    return out


# ---------------------------------------------------------------------------
# tangencies


class Line(NamedTuple):
    """``(x0, y0) + t (dx, dy)``."""

    point: tuple[complex, complex]
    direction: tuple[complex, complex]

    @classmethod
    def graph(cls, a, b) -> "Line":
        """``y = a x + b``."""
        return cls((0j, as_complex(b)), (1.0 + 0j, as_complex(a)))


class TangencyCount(NamedTuple):
    affine: int
    at_infinity: int
    projective_degree: int
    b_class: int
    points: list[tuple[complex, complex]]


def _restrict_to_line(mons, line: Line) -> np.ndarray:
    (x0, y0), (dx, dy) = line
    lx, ly = np.array([x0, dx], dtype=complex), np.array([y0, dy], dtype=complex)
    acc = np.zeros(1, dtype=complex)
    for i, j, c in mons:
        term = npoly.polymul(npoly.polypow(lx, i), npoly.polypow(ly, j)) * c
        acc = npoly.polyadd(acc, term)
    return acc


def count_tangencies(field: PolynomialVectorField, line: Line) -> TangencyCount:
    """Tangencies of the foliation with an affine line.

    The affine ones are the roots of ``dx Q - dy P`` restricted to the line
    (counted with multiplicity).  The projective degree is ``n`` when the
    line at infinity is invariant and ``n - 1`` otherwise; the remainder up
    to that degree sits at the line's point at infinity.  ``b_class`` is
    the smallest ``m`` with the field in the class of degree ``m``
    foliations having ``m - 1`` tangencies with a generic line.

    Raises
    ------
    InvariantLine
        The tangency polynomial vanishes identically.
    """
    (dx, dy) = line.direction
    if dx == 0 and dy == 0:
        raise ValueError("line direction must be nonzero")
    T = _trim(npoly.polysub(dx * _restrict_to_line(field.q, line), dy * _restrict_to_line(field.p, line)))
    if len(T) == 0:
        raise InvariantLine("line is invariant: the field is tangent along all of it")
    affine = len(T) - 1
    n = field.degree
    dicritical = len(_trim(_direction_poly(field, "x"))) == 0
    pdeg = n - 1 if dicritical else n
    (x0, y0) = line.point
    roots = np.roots(T[::-1]) if affine > 0 else []
    pts = [(complex(x0 + t * dx), complex(y0 + t * dy)) for t in roots]
    return TangencyCount(affine, pdeg - affine, pdeg, pdeg + 1, pts)


# ---------------------------------------------------------------------------
# broken separatrix connections


@dataclass(frozen=True)
class ConnectionCheckResult:
    O_P: complex
    O_Q: complex
    displacement: float
    gap: float
    verdict: str

    def to_json(self) -> dict:
        from .serialize import complex_to_pair

        return {"O_P": complex_to_pair(self.O_P), "O_Q": complex_to_pair(self.O_Q),
                "displacement": self.displacement, "gap": self.gap, "verdict": self.verdict}


def broken_connection_check(M_alpha: GermMap, M_beta: GermMap, cfg: NumericConfig = DEFAULT_CONFIG,
                            radius: float = 1.0, tol: float = 1e-9) -> ConnectionCheckResult:
    """Compare the attracting fixed points of two contracting holonomies on one transversal.

    ``assumptions-satisfied`` when the fixed points differ by more than
    ``tol`` (so ``M_beta`` moves ``O_P``), ``unbroken`` when they coincide,
    ``inconclusive`` when the gap and the displacement disagree.

    Raises
    ------
    ContractionViolated
        Either germ fails to contract the disc of ``radius`` into itself.
    """
    O_P = find_fixed_point(M_alpha, radius, cfg).p
    O_Q = find_fixed_point(M_beta, radius, cfg).p
    disp = abs(M_beta(O_P) - O_P)
    gap = abs(O_P - O_Q)
    if gap <= tol:
        verdict = "unbroken"
    elif disp > tol:
        verdict = "assumptions-satisfied"
    else:
        verdict = "inconclusive"
    return ConnectionCheckResult(O_P, O_Q, float(disp), float(gap), verdict)


def random_field(degree: int, rng: np.random.Generator, scale: float = 1.0) -> PolynomialVectorField:
    """Field with standard complex Gaussian coefficients on every monomial of degree <= ``degree``."""
    mons = [(i, d - i) for d in range(degree + 1) for i in range(d + 1)]

    def coeffs():
        return [(i, j, complex(*rng.normal(scale=scale, size=2))) for i, j in mons]

    return PolynomialVectorField(coeffs(), coeffs())


def field_summary(field: PolynomialVectorField, lines: Sequence[Line] = ()) -> dict:
    """Everything ``analyze`` reports about one field."""
    from .core import singular_points
    from .serialize import complex_to_pair

    affine = singular_points(field)
    out = {"degree": field.degree,
           "affine_singular_points": [
               {"x": complex_to_pair(s.x), "y": complex_to_pair(s.y), "hyperbolic": s.hyperbolic,
                "jacobian": [[complex_to_pair(v) for v in row] for row in np.asarray(s.jacobian)]}
               for s in affine]}
    out["infinity_points"] = [s.to_json() for s in infinity_singularities(field)]
    out["tangencies"] = []
    for ln in lines:
        tc = count_tangencies(field, ln)
        out["tangencies"].append({"point": [complex_to_pair(v) for v in ln.point],
                                  "direction": [complex_to_pair(v) for v in ln.direction],
                                  "affine": tc.affine, "at_infinity": tc.at_infinity,
                                  "projective_degree": tc.projective_degree, "b_class": tc.b_class})
    return out
