"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import cmath
import math
import time

import numpy as np
import pytest

from holocycles.certify import (brute_force_dependency, certify_integrals, certify_multipliers,
                                cycle_integral)
from holocycles.chart import choose_kappa
from holocycles.core import CrossSection, LocalLinearModel, nu_from_lambda
from holocycles.errors import NoAdmissibleDirection
from holocycles.forge import forge_family, select_subsequence
from holocycles.paths import CirclePath
from holocycles.presets import preset
from holocycles.projective import (Line, broken_connection_check, count_tangencies,
                                   infinity_singularities, random_field)
from holocycles.transport import AffineGerm, holonomy_germ

from oracles import affine_fixed_point, spirals_meet_sampled

A, B = 0.5, 0.2


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def demo_family():
    return forge_family(LocalLinearModel(1j), AffineGerm(A, B), count=10)


def test_01_affine_oracle(report):
    start = time.perf_counter()
    fam = forge_family(LocalLinearModel(1j), AffineGerm(A, B), count=30, certify=False)
    elapsed = time.perf_counter() - start
    nu = nu_from_lambda(1j)
    worst = 0.0
    for c in fam.cycles:
        p, mu = affine_fixed_point(nu, c.n, A, B)
        worst = max(worst, abs(c.p - p) / abs(p), abs(c.mu - mu) / abs(mu))
    ns = [c.n for c in fam.cycles]
    ok = ns == list(range(1, 31)) and worst <= 1e-9 and elapsed < 1.0
    report(1, ok, f"n=1..30 worst relative error {worst:.2e}, {elapsed:.3f} s")


def test_02_holonomy_exactness(report, rng):
    worst = 0.0
    for _ in range(20):
        lam = complex(rng.uniform(-1, 1), rng.uniform(0.1, 3))
        nu = nu_from_lambda(lam)
        g = holonomy_germ(LocalLinearModel(lam), CirclePath(), CrossSection(0.5))
        for w in (0.5, -0.25 + 0.4j, 0.1j, 0.0):
            worst = max(worst, abs(g(w) - nu * w))
    report(2, worst <= 1e-8, f"20 lambdas, worst |M(w) - nu w| = {worst:.2e}")


def test_03_multiplier_law(report):
    worst = 0.0
    checked = 0
    for name in ("affine-demo", "moebius-demo", "lifted-demo"):
        model, germ = preset(name)
        fam = forge_family(model, germ, count=10, certify=False)
        for c in fam.cycles:
            if name == "moebius-demo":
                d = (0.2 * 1.0 - 0.5 * 0.3) / (1.0 + 0.3 * c.p) ** 2
            else:
                d = B
            law = c.n * model.log_abs_nu + math.log(abs(d))
            worst = max(worst, abs(c.log_abs_mu - law) / abs(law), abs(math.log(abs(c.mu)) - law) / abs(law))
            checked += 1
    report(3, worst <= 1e-9, f"{checked} cycles, worst relative log deviation {worst:.2e}")


def _strict_ok(logs, margin=1e-6):
    acc = 0.0
    worst = math.inf
    for lm in logs:
        worst = min(worst, acc - lm)
        acc += lm
    return worst > margin, worst


def test_04_subsequence(report, demo_family, rng):
    fam = forge_family(LocalLinearModel(1j), AffineGerm(A, B), count=30, certify=False)
    logs = fam.log_moduli
    sel = select_subsequence(log_moduli=logs)
    ok, worst = _strict_ok([logs[i] for i in sel])
    ok = ok and len(sel) >= 2
    for _ in range(100):
        lognu = -rng.uniform(0.01, 3)
        logb = rng.uniform(-2, 3)
        logs = [n * lognu + logb for n in range(1, 80)]
        sel = select_subsequence(log_moduli=logs)
        good, w = _strict_ok([logs[i] for i in sel])
        ok = ok and good and bool(sel)
        worst = min(worst, w)
    report(4, ok, f"demo + 100 geometric families, smallest log-margin {worst:.3e}")


def test_05_disjointness(report):
    start = time.perf_counter()
    fam = forge_family(LocalLinearModel(1j), AffineGerm(A, B), count=10)
    analytic = fam.certificate.verdict == "certified"
    ws = [fam.germ(c.p) for c in fam.cycles]
    hits = []
    closest = math.inf
    for i in range(len(fam.cycles)):
        for j in range(i + 1, len(fam.cycles)):
            hit, d = spirals_meet_sampled(fam.cycles[i].n, ws[i], fam.cycles[j].n, ws[j], 1j,
                                          count=100, proximity=1e-6)
            closest = min(closest, d)
            if hit:
                hits.append((fam.cycles[i].n, fam.cycles[j].n))
    elapsed = time.perf_counter() - start
    ok = analytic and not hits and elapsed < 30
    report(5, ok, f"analytic {fam.certificate.verdict}; sampling oracle flagged {len(hits)} of 45 pairs "
                  f"(closest {closest:.2e}); {elapsed:.2f} s")


def test_06_kappa(report, rng):
    bad = 0
    for _ in range(1000):
        lam = complex(rng.normal(scale=2), rng.choice([-1, 1]) * rng.uniform(1e-3, 3))
        k = choose_kappa(lam)
        bad += not (k.real < 0 and (lam * k).real < 0)
    try:
        choose_kappa(-1.0)
        raised = False
    except NoAdmissibleDirection:
        raised = True
    report(6, bad == 0 and raised, f"{bad} violations in 1000; real negative rejected: {raised}")


def test_07_infinity_count(report, rng):
    wrong = 0
    for n in (2, 3):
        for _ in range(100):
            wrong += sum(p.multiplicity for p in infinity_singularities(random_field(n, rng))) != n + 1
    report(7, wrong == 0, f"{wrong} of 200 random fields with a wrong count")


def test_08_tangency_count(report, rng):
    wrong = 0
    total = 0
    for n in (2, 3, 4):
        for _ in range(100):
            f = random_field(n - 1, rng)
            line = Line(tuple(complex(*rng.normal(size=2)) for _ in range(2)),
                        tuple(complex(*rng.normal(size=2)) for _ in range(2)))
            wrong += count_tangencies(f, line).affine != n - 1
            total += 1
    report(8, wrong == 0, f"{wrong} of {total} fields with a wrong count")


def test_09_certificate_oracle(report, rng):
    conflicts = 0
    certified = 0
    for _ in range(200):
        N = int(rng.integers(1, 11))
        mus = np.exp(-np.cumsum(rng.exponential(1.5, size=N)) * rng.uniform(0.3, 2))
        Is = np.cumsum(rng.exponential(1.0, size=N)) * np.exp(1j * rng.uniform(0, 2 * np.pi, size=N))
        if certify_multipliers(mus).verdict == "certified":
            certified += 1
            conflicts += brute_force_dependency(mus, "multiplicative", tol=1e-7) is not None
        if certify_integrals(Is).verdict == "certified":
            certified += 1
            conflicts += brute_force_dependency(Is, "additive", tol=1e-7) is not None
    report(9, conflicts == 0 and certified > 0, f"{certified} certified verdicts, {conflicts} oracle conflicts")


def test_10_integral(report):
    def curve(n):
        t = np.linspace(0, 1, n + 1)
        return np.exp(2j * np.pi * t), np.exp(-2j * np.pi * t)

    a = cycle_integral(*curve(2048))
    err = abs(a.value + 4j * math.pi)
    x, y = curve(2048)
    rev = cycle_integral(x[::-1], y[::-1])
    b = cycle_integral(*curve(4096))
    ratio = a.error / b.error
    ok = err <= 1e-8 and abs(rev.value + a.value) <= a.error and 2 <= ratio <= 8
    report(10, ok, f"|I + 4 pi i| = {err:.2e}; reversal gap {abs(rev.value + a.value):.1e}; "
                   f"estimate ratio on refinement {ratio:.3f}")


def test_11_broken_connection(report):
    r = broken_connection_check(AffineGerm(0, 0.5), AffineGerm(0.1, 0.5))
    ok = r.verdict == "assumptions-satisfied" and r.displacement == 0.1 and r.O_P == 0 and abs(r.O_Q - 0.2) < 1e-15
    report(11, ok, f"verdict {r.verdict}, displacement {r.displacement!r}")
