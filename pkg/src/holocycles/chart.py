"""Geometry of the linear chart ``z dw = lambda w dz`` on the unit bidisc.

Leaves of the model are ``w = C z**lambda``; going ``t`` turns around the
separatrix ``w = 0`` from ``(1, w)`` traces the spiral
``(exp(2 pi i t), w exp(2 pi i lambda t))``.
"""
from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (DEFAULT_CONFIG, LeafwisePath, LocalLinearModel, NumericConfig,
                   as_complex, outside_closed_bidisc)
from .errors import GermVanishes, NoAdmissibleDirection, NoConvergence, OnSeparatrix
from .transport import GermMap

SECTION_SAFETY = 1.001
INTEGER_TOL = 1e-6


# ---------------------------------------------------------------------------
# spirals


def spiral_point(w, lam, t: float) -> tuple[complex, complex]:
    """Point at parameter ``t`` of the spiral through ``(1, w)``."""
    w, lam = as_complex(w), as_complex(lam)
    return cmath.exp(2j * math.pi * t), w * cmath.exp(2j * math.pi * lam * t)


@dataclass(frozen=True)
class SpiralCurve:
    """``t -> (exp(2 pi i t), start_w exp(2 pi i lambda t))`` for ``t`` in ``[0, turns]``."""

    start_w: complex
    turns: int
    lam: complex
    density: int = 64

    def __post_init__(self):
        if self.turns < 1:
            raise ValueError("a spiral makes at least one turn")

    @property
    def end_w(self) -> complex:
        return self.start_w * cmath.exp(2j * math.pi * self.lam * self.turns)

    def sample(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        t = np.linspace(0.0, self.turns, self.turns * self.density + 1)
        return t, np.exp(2j * math.pi * t), self.start_w * np.exp(2j * math.pi * self.lam * t)

    def to_csv(self) -> str:
        return samples_to_csv(*self.sample())


def samples_to_csv(t, z, w) -> str:
    buf = io.StringIO()
    buf.write("t,re_z,im_z,re_w,im_w\n")
    for row in zip(t, z, w):
        tt, zz, ww = float(row[0]), complex(row[1]), complex(row[2])
        buf.write(",".join(f"{v:.17g}" for v in (tt, zz.real, zz.imag, ww.real, ww.imag)) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# entry path normalization


def choose_kappa(lam) -> complex:
    """Unit ``kappa`` with ``Re kappa < 0`` and ``Re(lambda kappa) < 0``.

    Each condition confines ``arg kappa`` to an open half-circle; the result
    is the midpoint of their intersection, ``arg kappa = pi - arg(lambda)/2``,
    which maximizes the smaller of the two margins.
    """
    lam = as_complex(lam, "lambda")
    if lam == 0:
        raise NoAdmissibleDirection("lambda = 0")
    theta = cmath.phase(lam)
    # both margins equal |.| cos(theta / 2); zero exactly for real negative lambda
    if math.cos(theta / 2) <= 1e-15 or (lam.imag == 0 and lam.real < 0):
        raise NoAdmissibleDirection(f"no kappa works for real negative lambda {lam!r}")
    return cmath.exp(1j * (math.pi - theta / 2))


@dataclass(frozen=True)
class EntryPathSpec:
    endpoint: tuple[complex, complex]
    case: str
    rotation: float
    kappa: complex | None = None
    shrunk_radius: float | None = None
    junction_leafwise: bool = True


def _arc(r: float, a0: float, a1: float, n: int) -> np.ndarray:
    return r * np.exp(1j * np.linspace(a0, a1, n))


def normalize_entry_path(path: LeafwisePath, model: LocalLinearModel, tol: float = 1e-9,
                         delta: float = 0.05, tail_samples: int = 100
                         ) -> tuple[LeafwisePath, EntryPathSpec, LocalLinearModel]:
    """Bring a path from the separatrix ``L`` to the bidisc boundary into standard form.

    On return the path starts at ``(1, 0)``, ends at ``(1, w0)`` with
    ``|w0| < 1``, and every interior sample lies outside the closed unit
    bidisc.  If the path ended on ``|w| = 1``, an exponential tail
    ``(z e^{tau kappa}, w e^{lambda tau kappa})`` is appended and the bidisc
    shrunk in ``z``; the returned model records the new radii.

    Raises
    ------
    OnSeparatrix
        The endpoint lies on ``w = 0`` or ``z = 0``.
    NoAdmissibleDirection
        Propagated from :func:`choose_kappa`.
    """
    z, w = path.z.copy(), path.w.copy()
    zt, wt = complex(z[-1]), complex(w[-1])
    if abs(wt) <= tol or abs(zt) <= tol:
        raise OnSeparatrix(f"endpoint ({zt:.6g}, {wt:.6g}) lies on a separatrix")
    if abs(w[0]) > tol:
        raise ValueError("entry path must start on the separatrix w = 0")

    case, kappa, shrunk = "I", None, None
    if abs(abs(wt) - 1) <= tol:
        case = "II"
        kappa = choose_kappa(model.lam)
        tau = np.linspace(0.0, 1.0, tail_samples + 1)
        tz = zt * np.exp(tau * kappa)
        tw = wt * np.exp(model.lam * tau * kappa)
        if not (np.all(np.diff(np.abs(tz)) < 0) and np.all(np.diff(np.abs(tw)) < 0)):
            raise ValueError("exponential tail does not decrease both moduli")
        shrunk = abs(cmath.exp(kappa) * zt)
        z = np.concatenate([z, tz[1:]]) / shrunk
        w = np.concatenate([w, tw[1:]])
        model = LocalLinearModel(model.lam, model.z_radius * shrunk, model.w_radius, model.conjugated)
        zt, wt = complex(z[-1]), complex(w[-1])
    elif not (abs(abs(zt) - 1) <= tol and abs(wt) < 1):
        raise ValueError(f"endpoint ({zt:.6g}, {wt:.6g}) is not on the bidisc boundary")

    # rotate (and rescale by |zt|, within tol of 1) so the endpoint is z = 1
    rotation = -cmath.phase(zt)
    model = LocalLinearModel(model.lam, model.z_radius * abs(zt), model.w_radius, model.conjugated)
    z = z / zt
    z[-1] = 1.0

    outside = outside_closed_bidisc(z, w)
    zs = complex(z[0])
    leafwise = True
    if abs(zs) > 1 + tol:
        # start lies on L outside the bidisc: walk there along L from (1, 0)
        pz = np.concatenate([np.linspace(1.0, abs(zs), 20), _arc(abs(zs), 0.0, cmath.phase(zs), 20)[1:]])
        pw = np.zeros_like(pz)
        body_z, body_w = z[1:], w[1:]
    else:
        k = int(np.argmax(outside[1:])) + 1
        if not outside[k]:
            raise ValueError("entry path never leaves the closed bidisc")
        zk, wk = complex(z[k]), complex(w[k])
        R = 1.0 + delta
        phi = cmath.phase(zk)
        pz = np.concatenate([np.linspace(1.0, R, 20), _arc(R, 0.0, phi, 20)[1:]])
        pw = np.zeros_like(pz)
        corner = R * cmath.exp(1j * phi)
        if wk != 0:
            leafwise = False
            pz = np.concatenate([pz, np.full(19, corner)])
            pw = np.concatenate([pw, np.linspace(0, wk, 20)[1:]])
        seg = np.linspace(corner, zk, 20)[1:-1]
        pz = np.concatenate([pz, seg])
        pw = np.concatenate([pw, np.full(len(seg), wk)])
        body_z, body_w = z[k:], w[k:]

    nz = np.concatenate([pz, body_z])
    nw = np.concatenate([pw, body_w])
    out = LeafwisePath(np.linspace(0.0, 1.0, len(nz)), nz, nw)
    end_z, end_w = out.end
    if not (abs(end_z - 1) < 1e-10 and abs(end_w) < 1 and out.interior_exterior()
            and out.start == (1.0, 0.0)):
        raise ValueError("normalized entry path fails the standard-form checks")
    spec = EntryPathSpec((end_z, end_w), case, rotation, kappa, shrunk, leafwise)
    return out, spec, model


# ---------------------------------------------------------------------------
# section size


class BoundaryImage(NamedTuple):
    points: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    center_value: complex


def boundary_image(germ: GermMap, radius: float, samples: int) -> BoundaryImage:
    """Values and derivatives of ``germ`` on the circle ``|w - anchor| = radius``."""
    theta = 2 * math.pi * np.arange(samples) / samples
    pts = germ.anchor + radius * np.exp(1j * theta)
    vals, ders = zip(*(germ.evaluate(p) for p in pts))
    return BoundaryImage(pts, np.array(vals, dtype=complex), np.array(ders, dtype=complex),
                         germ(germ.anchor))


def winding_number(values: np.ndarray, center: complex = 0j) -> int:
    """Winding of the closed polygon ``values`` around ``center``."""
    ang = np.angle(np.append(values, values[0]) - center)
    turns = np.sum(np.angle(np.exp(1j * np.diff(ang)))) / (2 * math.pi)
    return int(round(turns))


class SectionBound(NamedTuple):
    passed: bool
    max_abs: float
    min_abs: float
    log_margin: float


def certify_section_bound(germ: GermMap, radius: float, nu, samples: int = 128,
                          image: BoundaryImage | None = None) -> SectionBound:
    """Check ``|nu| < |M(w)/M(w')| < 1/|nu|`` on the disc of ``radius``.

    By the maximum principle for ``M`` and ``1/M`` it suffices that the
    boundary ratio ``max|M| / min|M|`` stays below ``1/|nu|``; a safety
    factor of 1.001 absorbs the sampling.  ``log_margin`` is
    ``-log|nu| - log(max/min) - log(1.001)``.

    Raises
    ------
    GermVanishes
        ``M`` has a zero in the disc (tiny modulus or nonzero winding around 0).
    """
    img = image or boundary_image(germ, radius, samples)
    mods = np.abs(img.values)
    mx, mn = float(mods.max()), float(mods.min())
    if mn <= 1e-14 * max(mx, 1e-300) or abs(img.center_value) == 0 or winding_number(img.values) != 0:
        raise GermVanishes(f"germ has a zero in the disc of radius {radius:g}")
    log_nu = math.log(abs(as_complex(nu)))
    margin = -log_nu - math.log(mx / mn) - math.log(SECTION_SAFETY)
    return SectionBound(margin > 0, mx, mn, margin)


class Univalence(NamedTuple):
    passed: bool
    min_abs_deriv: float
    winding: int


def certify_univalence(germ: GermMap, radius: float, samples: int = 128,
                       image: BoundaryImage | None = None) -> Univalence:
    """Numeric univalence: ``M'`` nonvanishing on the boundary and the boundary image winds once."""
    img = image or boundary_image(germ, radius, samples)
    dmods = np.abs(img.derivs)
    wind = winding_number(img.values, img.center_value)
    ok = bool(dmods.min() > 1e-12 * max(dmods.max(), 1e-300)) and wind == 1
    return Univalence(ok, float(dmods.min()), wind)


def shrink_section(germ: GermMap, radius, nu, cfg: NumericConfig = DEFAULT_CONFIG) -> float:
    """Largest ``radius / 2**k`` passing both the section bound and numeric univalence.

    Raises
    ------
    NoConvergence
        No radius found within ``cfg.max_iterations`` halvings.
    GermVanishes
        Propagated when the germ vanishes at its anchor.
    """
    r = float(radius)
    for _ in range(cfg.max_iterations):
        img = boundary_image(germ, r, cfg.boundary_samples)
        if certify_section_bound(germ, r, nu, image=img).passed and \
                certify_univalence(germ, r, image=img).passed:
            return r
        r /= 2
        if r == 0:
            break
    raise NoConvergence("no section radius satisfies the ratio bound")


# ---------------------------------------------------------------------------
# spiral intersections


class SpiralVerdict(NamedTuple):
    kind: str          # "disjoint", "intersect" or "same-spiral"
    k: int | None = None


def shift_candidate(ratio: complex, lam, tol: float = INTEGER_TOL) -> int | None:
    """Integer ``k`` with ``ratio = nu**k`` to tolerance, or None."""
    lam = as_complex(lam)
    k_real = math.log(abs(ratio)) / (-2 * math.pi * lam.imag)
    k = round(k_real)
    if abs(k_real - k) >= tol:
        return None
    nu_k = cmath.exp(2j * math.pi * lam * k)
    if abs(ratio / nu_k - 1) >= tol:
        return None
    return int(k)


def spirals_intersect(n: int, w_n, m: int, w_m, lam, tol: float = INTEGER_TOL) -> SpiralVerdict:
    """Analytic intersection test for the spirals from ``(1, w_n)`` (``n`` turns) and ``(1, w_m)``.

    The spirals meet iff ``t - s = k`` is an integer with
    ``w_m / w_n = nu**k`` and the windows ``[0, n]`` and ``[k, k + m]``
    overlap.
    """
    w_n, w_m = as_complex(w_n), as_complex(w_m)
    if w_n == 0 or w_m == 0:
        raise ValueError("spirals through the separatrix are excluded")
    k = shift_candidate(w_m / w_n, lam, tol)
    if k is None:
        return SpiralVerdict("disjoint")
    if k == 0 and n == m:
        return SpiralVerdict("same-spiral", 0)
    if -m <= k <= n:
        return SpiralVerdict("intersect", k)
    return SpiralVerdict("disjoint")
