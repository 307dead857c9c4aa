"""Homological independence certificates for families of cycles on one leaf.

Two sufficient criteria are checked: strictly nested multipliers
(``|mu_1| < 1`` and ``|mu_j| < |mu_1 ... mu_{j-1}|``) and dominating
periods of ``x dy - y dx`` (``|I_j| > |I_1| + ... + |I_{j-1}|``).  A
brute-force search over ``{-1, 0, 1}`` tuples serves as an oracle.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .core import DEFAULT_CONFIG, NumericConfig
from .errors import NotClosed, TooLarge

LOG_MARGIN = 1e-6
ERROR_FACTOR = 10.0
DIRECT_LIMIT = 12
MAX_BRUTE = 20


class Entry(NamedTuple):
    j: int
    value: float
    threshold: float
    log_margin: float
    passed: bool


@dataclass
class IndependenceCertificate:
    method: str
    entries: list[Entry]
    caveats: list[str] = field(default_factory=list)
    quadrature_errors: list[float] | None = None

    @property
    def verdict(self) -> str:
        return "certified" if self.entries and all(e.passed for e in self.entries) else "not-certified"

    @property
    def first_failure(self) -> int | None:
        for e in self.entries:
            if not e.passed:
                return e.j
        return None

    def to_json(self) -> dict:
        out = {"method": self.method,
               "entries": [{"j": e.j, "value": e.value, "threshold": e.threshold,
                            "log_margin": e.log_margin, "passed": e.passed} for e in self.entries],
               "verdict": self.verdict, "caveats": list(self.caveats)}
        if self.quadrature_errors is not None:
            out["quadrature_errors"] = list(self.quadrature_errors)
        return out


def certify_multipliers(mus: Sequence[complex] | None = None, *,
                        log_moduli: Sequence[float] | None = None,
                        margin: float = LOG_MARGIN, caveats: Sequence[str] = ()) -> IndependenceCertificate:
    """Multiplier criterion in log-modulus.

    Entry ``j`` reports ``value = log|mu_j|`` against
    ``threshold = sum_{i<j} log|mu_i|`` (0 for ``j = 1``); it passes when
    ``threshold - value >= margin``.
    """
    if log_moduli is None:
        log_moduli = [math.log(abs(m)) if m != 0 else -math.inf for m in (() if mus is None else mus)]
    entries = []
    acc = 0.0
    for j, lm in enumerate(log_moduli, start=1):
        gap = acc - lm
        ok = math.isfinite(lm) and gap >= margin
        entries.append(Entry(j, float(lm), float(acc), float(gap), bool(ok)))
        acc += lm
    return IndependenceCertificate("multiplier", entries, list(caveats))


def certify_integrals(Is: Sequence[complex], errors: Sequence[float] | None = None,
                      factor: float = ERROR_FACTOR, caveats: Sequence[str] = ()) -> IndependenceCertificate:
    """Domination criterion ``|I_j| > |I_1| + ... + |I_{j-1}|`` with ``|I_1| > 0``.

    Each inequality must hold with an absolute margin of at least
    ``factor`` times the summed quadrature error estimates of the terms
    involved (strict even when no errors are supplied).
    ``log_margin`` is ``log|I_j| - log(threshold)``.
    """
    mods = [abs(complex(v)) for v in Is]
    errs = [0.0] * len(mods) if errors is None else [float(e) for e in errors]
    entries = []
    acc, acc_err = 0.0, 0.0
    for j, (m, e) in enumerate(zip(mods, errs), start=1):
        need = factor * (acc_err + e)
        ok = m - acc > need and m > 0
        lm = math.log(m) - math.log(acc) if m > 0 and acc > 0 else (math.inf if m > 0 else -math.inf)
        entries.append(Entry(j, m, acc, lm, bool(ok)))
        acc += m
        acc_err += e
    return IndependenceCertificate("integral", entries, list(caveats),
                                   None if errors is None else errs)


# ---------------------------------------------------------------------------
# periods


class CycleIntegral(NamedTuple):
    value: complex
    error: float


def _polygon_sum(x: np.ndarray, y: np.ndarray) -> complex:
    return complex(np.sum(x[:-1] * y[1:] - y[:-1] * x[1:]))


def cycle_integral(x, y, closure_tol: float = 1e-8) -> CycleIntegral:
    """``int x dy - y dx`` over a closed sampled curve in the ambient chart.

    The sampled curve is integrated as a polygon (exact for the piecewise
    linear interpolant, second order in the spacing) at full and half
    resolution; the Richardson combination is returned together with the
    error estimate ``|S_h - S_2h| / 3``.

    Raises
    ------
    NotClosed
        First and last samples differ by more than ``closure_tol``.
    """
    x, y = np.asarray(x, complex), np.asarray(y, complex)
    if len(x) < 5 or len(x) != len(y):
        raise ValueError("need at least 5 matching samples")
    gap = max(abs(x[-1] - x[0]), abs(y[-1] - y[0]))
    if gap > closure_tol:
        raise NotClosed(f"curve does not close (gap {gap:.3e})")
    fine = _polygon_sum(x, y)
    idx = np.arange(0, len(x), 2)
    if idx[-1] != len(x) - 1:
        idx = np.append(idx, len(x) - 1)
    coarse = _polygon_sum(x[idx], y[idx])
    diff = (fine - coarse) / 3
    return CycleIntegral(fine + diff, abs(diff))


# ---------------------------------------------------------------------------
# oracle


def _canonical(alpha) -> tuple[int, ...]:
    alpha = tuple(int(a) for a in alpha)
    for a in alpha:
        if a:
            return alpha if a > 0 else tuple(-b for b in alpha)
    return alpha


def _features(values, mode: str) -> np.ndarray:
    if mode == "additive":
        v = np.array([complex(x) for x in values], dtype=complex)
    elif mode == "multiplicative":
        # moduli only: the multiplier criterion concerns |mu|
        v = np.array([math.log(abs(complex(x))) if x != 0 else -1e300 for x in values], dtype=complex)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return np.column_stack([v.real, v.imag])


def brute_force_dependency(values: Sequence[complex], mode: str = "additive",
                           tol: float = 1e-9) -> tuple[int, ...] | None:
    """Nonzero ``alpha`` in ``{-1, 0, 1}**N`` with ``|sum alpha_n v_n| < tol``, or None.

    In multiplicative mode ``v_n`` is replaced by ``log|v_n|``.  The returned
    tuple has its first nonzero entry equal to +1.  Small ``N`` is
    enumerated directly; larger ``N`` is split in two halves matched through
    a k-d tree.

    Raises
    ------
    TooLarge
        ``N > 20``.
    """
    N = len(values)
    if N > MAX_BRUTE:
        raise TooLarge(f"{N} values exceed the enumeration limit of {MAX_BRUTE}")
    if N == 0:
        return None
    feats = _features(values, mode)
    if N <= DIRECT_LIMIT:
        alphas = np.array(list(itertools.product((0, 1, -1), repeat=N)), dtype=float)[1:]
        sums = alphas @ feats
        norms = np.hypot(sums[:, 0], sums[:, 1])
        hits = np.nonzero(norms < tol)[0]
        if len(hits) == 0:
            return None
        return _canonical(alphas[hits[0]])
    half = N // 2
    left = np.array(list(itertools.product((0, 1, -1), repeat=half)), dtype=float)
    right = np.array(list(itertools.product((0, 1, -1), repeat=N - half)), dtype=float)
    ls, rs = left @ feats[:half], right @ feats[half:]
    tree = cKDTree(rs)
    # sum = l + r, so look for r near -l
    for i, pairs in enumerate(tree.query_ball_point(-ls, tol)):
        for j in pairs:
            alpha = np.concatenate([left[i], right[j]])
            if np.any(alpha) and np.hypot(*(ls[i] + rs[j])) < tol:
                return _canonical(alpha)
    return None


def integrals_for_family(family, cfg: NumericConfig = DEFAULT_CONFIG) -> list[CycleIntegral]:
    """Periods of the family's representatives, mapped back to the ambient chart."""
    out = []
    for c in family.cycles:
        rep = c.representative
        x, y = family.model.to_ambient(rep.z, rep.w)
        out.append(cycle_integral(x, y))
    return out
