"""Countable families of limit cycles on one leaf.

Given the local holonomy ``w -> nu w`` of a complex hyperbolic point and a
germ ``M_beta`` obtained by leaving the bidisc along ``beta`` and coming
back, every ``M_n = nu**n M_beta`` is a holonomy of the same leaf.  For
large ``n`` it contracts, its fixed point ``p_n`` gives a limit cycle and
the multiplier ``mu_n = nu**n M_beta'(p_n)`` decays geometrically.
"""
from __future__ import annotations

import cmath
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .chart import (boundary_image, certify_section_bound, certify_univalence,
                    shrink_section, spirals_intersect)
from .core import (DEFAULT_CONFIG, LocalLinearModel, NumericConfig, as_complex,
                   outside_closed_bidisc)
from .errors import AssemblyError, ContractionViolated, GermVanishes, HoloError, NoConvergence
from .serialize import complex_to_pair
from .transport import GermMap, LinearGerm, compose

LOG_MARGIN = 1e-6
CONTRACTION_TARGET = 0.5
IMAGE_MARGIN = 0.999
PICARD_SWITCH = 1e-4
DEFAULT_COUNT = 10


def _nu_power(nu: complex, n: int) -> complex:
    return cmath.exp(n * cmath.log(nu))


def build_Mn(nu, M_beta: GermMap, n: int) -> GermMap:
    """``nu**n * M_beta`` as a germ, in closed form when ``M_beta`` is."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return compose(LinearGerm(_nu_power(as_complex(nu), n)), M_beta)


def min_contracting_index(nu, M_beta: GermMap, radius: float, samples: int = 128) -> int:
    """Least ``n`` with ``sup|M_n'| <= 1/2`` and ``M_n(D)`` inside ``D`` with margin.

    Both suprema are taken over ``samples`` boundary points (maximum
    principle) and the comparison is done in log scale.  Because ``|nu| < 1``
    both conditions persist for all larger ``n``.

    Raises
    ------
    ContractionViolated
        The anchor is too far from 0 for ``nu**n M_beta(D)`` to land in ``D``.
    """
    log_nu = math.log(abs(as_complex(nu)))
    if not log_nu < 0:
        raise ContractionViolated("|nu| must be below 1")
    img = boundary_image(M_beta, radius, samples)
    max_d = float(np.abs(img.derivs).max())
    max_m = float(np.abs(img.values).max())
    room = IMAGE_MARGIN * radius - abs(M_beta.anchor)
    if not room > 0:
        raise ContractionViolated("the section disc does not contain the separatrix point w = 0")
    if not (math.isfinite(max_d) and math.isfinite(max_m)):
        raise NoConvergence("non-finite germ values on the section boundary")

    def ok(n):
        c1 = max_d == 0 or n * log_nu + math.log(max_d) <= math.log(CONTRACTION_TARGET)
        c2 = max_m == 0 or n * log_nu + math.log(max_m) < math.log(room)
        return c1 and c2

    bounds = [1]
    if max_d > 0:
        bounds.append(math.ceil((math.log(CONTRACTION_TARGET) - math.log(max_d)) / log_nu))
    if max_m > 0:
        bounds.append(math.ceil((math.log(room) - math.log(max_m)) / log_nu))
    n = max(1, max(bounds) - 1)
    while n > 1 and ok(n - 1):
        n -= 1
    while not ok(n):
        n += 1
    return n


class FixedPoint(NamedTuple):
    p: complex
    residual: float
    iterations: int


def find_fixed_point(M: GermMap, radius: float, cfg: NumericConfig = DEFAULT_CONFIG,
                     seed=None, precheck: bool = True) -> FixedPoint:
    """Fixed point of a contraction of the disc ``|w - anchor| <= radius``.

    Picard iteration from ``seed`` (default: the anchor) until the residual
    drops below 1e-4, then Newton on ``M(w) - w`` down to
    ``cfg.fixed_point_tol``.

    Parameters
    ----------
    precheck : bool
        Sample the boundary first and refuse maps that are not contracting
        or do not map the disc into itself.

    Raises
    ------
    ContractionViolated
        Failed precheck, or an iterate left the disc.
    NoConvergence
        Iteration budget exhausted.
    """
    c = M.anchor
    if precheck:
        img = boundary_image(M, radius, cfg.boundary_samples)
        if np.abs(img.derivs).max() >= 1 or np.abs(img.values - c).max() >= radius:
            raise ContractionViolated("map does not contract the disc into itself")
    w = c if seed is None else as_complex(seed, "seed")
    tol = cfg.fixed_point_tol
    value, d = M.evaluate(w)
    res = abs(value - w)
    it = 0

    def target(x):
        # relative once |p| < 1: fixed points of high iterates can sit far below tol
        return tol * min(1.0, abs(x)) if x != 0 else 0.0

    while it == 0 or (res >= PICARD_SWITCH and res > target(w)):
        if it >= cfg.max_iterations:
            raise NoConvergence("Picard iteration budget exhausted")
        w = value
        if abs(w - c) > radius:
            raise ContractionViolated(f"iterate {w!r} left the disc")
        value, d = M.evaluate(w)
        res = abs(value - w)
        it += 1
    best = (res, w)
    stalls = 0
    while res > target(w):
        if it >= cfg.max_iterations or stalls > 3:
            if best[0] <= tol:
                return FixedPoint(best[1], best[0], it)
            raise NoConvergence(f"Newton stalled at residual {best[0]:.3e}")
        w = w - (value - w) / (d - 1)
        if abs(w - c) > radius:
            raise ContractionViolated(f"Newton iterate {w!r} left the disc")
        value, d = M.evaluate(w)
        res = abs(value - w)
        it += 1
        if res < best[0]:
            best = (res, w)
            stalls = 0
        else:
            stalls += 1
    return FixedPoint(w, res, it)


def multiplier(nu, n: int, M_beta: GermMap, p_n) -> complex:
    """``nu**n * M_beta'(p_n)``."""
    return _nu_power(as_complex(nu), n) * M_beta.deriv(p_n)


def log_abs_multiplier(nu, n: int, M_beta: GermMap, p_n) -> float:
    """``n log|nu| + log|M_beta'(p_n)|``; finite where ``|mu_n|`` underflows."""
    d = abs(M_beta.deriv(p_n))
    return n * math.log(abs(as_complex(nu))) + (math.log(d) if d > 0 else -math.inf)


# ---------------------------------------------------------------------------
# representatives


@dataclass
class Representative:
    """Closed curve: lift of ``beta`` from ``(1, p)`` then ``n`` turns of the spiral back to ``(1, p)``.

    ``t`` runs over ``[0, 1]`` on the lift and ``[1, 1 + n]`` on the spiral.
    """

    t: np.ndarray
    z: np.ndarray
    w: np.ndarray
    beta_samples: int
    closure_defect: float
    beta_exterior: bool

    @property
    def beta(self):
        k = self.beta_samples
        return self.t[:k], self.z[:k], self.w[:k]

    @property
    def spiral(self):
        k = self.beta_samples - 1
        return self.t[k:], self.z[k:], self.w[k:]


def z_winding(z: np.ndarray) -> int:
    ang = np.unwrap(np.angle(z))
    return int(round((ang[-1] - ang[0]) / (2 * math.pi)))


def assemble_representative(model: LocalLinearModel, M_beta: GermMap, p_n, n: int,
                            cfg: NumericConfig = DEFAULT_CONFIG) -> Representative:
    """Concatenate the ``beta``-lift through ``(1, p_n)`` and the spiral through ``(1, M_beta(p_n))``.

    Raises
    ------
    AssemblyError
        The two pieces do not meet within ``fixed_point_tol`` plus the lift
        tolerance at either junction.
    """
    p_n = as_complex(p_n)
    tb, zb, wb = M_beta.beta_curve(p_n, cfg=cfg)
    tb, zb, wb = np.asarray(tb, float), np.asarray(zb, complex), np.asarray(wb, complex)
    q = M_beta(p_n)
    ts = np.linspace(0.0, n, n * cfg.spiral_density + 1)
    zs = np.exp(2j * math.pi * ts)
    ws = q * np.exp(2j * math.pi * model.lam * ts)
    # exact endpoints: z is 1 at every integer turn
    zs[0] = zs[-1] = 1.0
    ws[-1] = _nu_power(model.nu, n) * q
    tol = cfg.fixed_point_tol + 100 * (cfg.ode_rel_tol * max(abs(q), abs(p_n)) + cfg.ode_abs_tol)
    head = max(abs(zb[-1] - 1), abs(wb[-1] - q))
    tail = max(abs(zb[0] - 1), abs(ws[-1] - wb[0]))
    defect = max(head, tail)
    if defect > tol:
        raise AssemblyError(f"representative of index {n} fails to close (defect {defect:.3e})")
    exterior = bool(np.all(outside_closed_bidisc(zb[1:-1], wb[1:-1])))
    t = np.concatenate([tb, 1.0 + ts[1:]])
    z = np.concatenate([zb, zs[1:]])
    w = np.concatenate([wb, ws[1:]])
    return Representative(t, z, w, len(tb), defect, exterior)


# ---------------------------------------------------------------------------
# subsequence


def select_subsequence(mus: Sequence[complex] | None = None, *,
                       log_moduli: Sequence[float] | None = None,
                       margin: float = LOG_MARGIN) -> list[int]:
    """Greedy choice of indices with ``|mu_j| < 1`` and ``|mu_j| < |mu_1 ... mu_{j-1}|``.

    Comparisons are made on log-moduli with a strict margin.  Pass
    ``log_moduli`` directly when the moduli underflow.
    """
    if log_moduli is None:
        log_moduli = [math.log(abs(m)) if m != 0 else -math.inf for m in (() if mus is None else mus)]
    chosen: list[int] = []
    bound = 0.0
    for j, lm in enumerate(log_moduli):
        if not math.isfinite(lm):
            continue
        if lm < bound - margin:
            chosen.append(j)
            bound = lm if len(chosen) == 1 else bound + lm
    return chosen


# ---------------------------------------------------------------------------
# families


@dataclass
class LimitCycle:
    n: int
    p: complex
    mu: complex
    log_abs_mu: float
    residual: float
    iterations: int
    representative: Representative

    def to_json(self) -> dict:
        rep = self.representative
        return {
            "n": self.n,
            "p": complex_to_pair(self.p),
            "mu": complex_to_pair(self.mu),
            "log_abs_mu": self.log_abs_mu,
            "residual": self.residual,
            "closure_defect": rep.closure_defect,
            "beta_samples": rep.beta_samples,
            "t": [float(x) for x in rep.t],
            "curve": [[float(a.real), float(a.imag), float(b.real), float(b.imag)]
                      for a, b in zip(rep.z, rep.w)],
        }


@dataclass
class CycleFamily:
    model: LocalLinearModel
    germ: GermMap
    section_radius: float
    first_index: int
    cycles: list[LimitCycle] = field(default_factory=list)
    certificate: "DisjointnessCertificate | None" = None

    @property
    def mus(self) -> list[complex]:
        return [c.mu for c in self.cycles]

    @property
    def log_moduli(self) -> list[float]:
        return [c.log_abs_mu for c in self.cycles]

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "germ": self.germ.to_json(),
            "section_radius": self.section_radius,
            "first_index": self.first_index,
            "cycles": [c.to_json() for c in self.cycles],
            "certificate": self.certificate.to_json() if self.certificate else None,
        }


@contextmanager
def _stage(name: str):
    try:
        yield
    except HoloError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def forge_family(model: LocalLinearModel, germ: GermMap, count: int = DEFAULT_COUNT,
                 radius: float | None = None, cfg: NumericConfig = DEFAULT_CONFIG,
                 certify: bool = True) -> CycleFamily:
    """Build ``count`` limit cycles ``n = N, ..., N + count - 1`` and optionally certify them.

    ``radius`` is the starting radius of the section search; by default
    0.5, or the germ's domain radius if that is smaller.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    nu = model.nu
    r0 = radius if radius is not None else min(germ.domain_radius, 0.5)
    with _stage("shrink_section"):
        r = shrink_section(germ, r0, nu, cfg)
    with _stage("min_contracting_index"):
        N = min_contracting_index(nu, germ, r, cfg.boundary_samples)
    family = CycleFamily(model, germ, r, N)
    for n in range(N, N + count):
        Mn = build_Mn(nu, germ, n)
        with _stage(f"find_fixed_point[n={n}]"):
            fp = find_fixed_point(Mn, r, cfg, precheck=False)
        mu = multiplier(nu, n, germ, fp.p)
        with _stage(f"assemble_representative[n={n}]"):
            rep = assemble_representative(model, germ, fp.p, n, cfg)
        family.cycles.append(LimitCycle(n, fp.p, mu, log_abs_multiplier(nu, n, germ, fp.p),
                                        fp.residual, fp.iterations, rep))
    if certify:
        family.certificate = certify_disjoint_family(family, cfg)
    return family


# ---------------------------------------------------------------------------
# disjointness


class Clause(NamedTuple):
    name: str
    passed: bool
    detail: dict


@dataclass
class DisjointnessCertificate:
    clauses: list[Clause]
    caveats: list[str]

    @property
    def verdict(self) -> str:
        return "certified" if all(c.passed for c in self.clauses) else "not-certified"

    def failing(self) -> list[str]:
        return [c.name for c in self.clauses if not c.passed]

    def to_json(self) -> dict:
        return {"kind": "disjointness",
                "clauses": [{"name": c.name, "passed": c.passed, **c.detail} for c in self.clauses],
                "verdict": self.verdict, "caveats": list(self.caveats)}


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return ((q - p).conjugate() * (r - p)).imag

    o1, o2, o3, o4 = orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def polyline_is_simple(z: np.ndarray) -> bool:
    """No two non-adjacent segments of the polygonal path cross (endpoints may coincide)."""
    z = np.asarray(z, complex)
    m = len(z) - 1
    closed = abs(z[0] - z[-1]) < 1e-12
    for i in range(m):
        for j in range(i + 2, m):
            if closed and i == 0 and j == m - 1:
                continue
            if _segments_cross(z[i], z[i + 1], z[j], z[j + 1]):
                return False
    return True


def certify_disjoint_family(family: CycleFamily, cfg: NumericConfig = DEFAULT_CONFIG,
                            distinct_tol: float = 1e-12) -> DisjointnessCertificate:
    """Check that the representatives are simple and pairwise disjoint.

    Clauses, in order: ``section-bound`` (ratio bound on the section disc),
    ``univalence`` (numeric), ``distinct-fixed-points``,
    ``spiral-disjointness`` (analytic integer-shift test for every pair;
    the shift ``k = 0`` is excluded by the two previous clauses) and
    ``beta-lifts`` (lift interiors outside the closed bidisc, simple base
    curve, distinct start points).  Failures are reported, never raised.
    """
    nu, r, germ = family.model.nu, family.section_radius, family.germ
    clauses: list[Clause] = []
    try:
        img = boundary_image(germ, r, cfg.boundary_samples)
        sb = certify_section_bound(germ, r, nu, image=img)
        un = certify_univalence(germ, r, image=img)
        clauses.append(Clause("section-bound", sb.passed,
                              {"radius": r, "max_abs": sb.max_abs, "min_abs": sb.min_abs,
                               "log_margin": sb.log_margin}))
        clauses.append(Clause("univalence", un.passed,
                              {"min_abs_derivative": un.min_abs_deriv, "winding": un.winding}))
    except GermVanishes as exc:
        clauses.append(Clause("section-bound", False, {"radius": r, "error": str(exc)}))
        clauses.append(Clause("univalence", False, {"error": "not evaluated"}))
    ratio_ok = clauses[0].passed and clauses[1].passed

    cycles = family.cycles
    ps = [c.p for c in cycles]
    min_gap, dup = math.inf, []
    for i in range(len(ps)):
        for j in range(i + 1, len(ps)):
            gap = abs(ps[i] - ps[j])
            scale = max(abs(ps[i]), abs(ps[j]), 1e-300)
            min_gap = min(min_gap, gap / scale)
            if gap <= distinct_tol * scale:
                dup.append([cycles[i].n, cycles[j].n])
    distinct = not dup
    clauses.append(Clause("distinct-fixed-points", distinct,
                          {"min_relative_gap": min_gap if math.isfinite(min_gap) else None,
                           "duplicates": dup}))

    ws = [germ(p) for p in ps]
    bad, zero_shift = [], 0
    for i in range(len(cycles)):
        for j in range(i + 1, len(cycles)):
            v = spirals_intersect(cycles[i].n, ws[i], cycles[j].n, ws[j], family.model.lam)
            if v.kind == "disjoint":
                continue
            if v.k == 0 and ratio_ok and distinct:
                # equal spiral starts would force p_i = p_j through univalence
                zero_shift += 1
                continue
            bad.append({"pair": [cycles[i].n, cycles[j].n], "verdict": v.kind, "k": v.k})
    clauses.append(Clause("spiral-disjointness", not bad and ratio_ok,
                          {"pairs": len(cycles) * (len(cycles) - 1) // 2,
                           "zero_shift_resolved": zero_shift, "failures": bad}))

    exterior = all(c.representative.beta_exterior for c in cycles)
    simple = all(polyline_is_simple(c.representative.beta[1]) for c in cycles[:1])
    sep = math.inf
    for i in range(len(cycles)):
        _, zi, wi = cycles[i].representative.beta
        for j in range(i + 1, len(cycles)):
            _, zj, wj = cycles[j].representative.beta
            k = min(len(zi), len(zj))
            sep = min(sep, float(np.min(np.abs(zi[1:k - 1] - zj[1:k - 1]) + np.abs(wi[1:k - 1] - wj[1:k - 1]))
                                if k > 2 else math.inf))
    clauses.append(Clause("beta-lifts", exterior and simple and distinct,
                          {"interiors_exterior": exterior, "base_simple": simple,
                           "min_sample_separation": sep if math.isfinite(sep) else None}))
    caveats = ["numeric univalence"]
    if not ratio_ok:
        caveats.append("section radius does not satisfy the ratio bound")
    return DisjointnessCertificate(clauses, caveats)
