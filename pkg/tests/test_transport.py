import cmath
import math

import numpy as np
import pytest

from holocycles.core import CrossSection, LocalLinearModel, NumericConfig, PolynomialVectorField
from holocycles.errors import DomainError, SingularEncounter
from holocycles.paths import BasePath, CirclePath, ConcatPath, ConstantPath, PolylinePath
from holocycles.presets import lifted_demo_field
from holocycles.transport import (STANDARD_LOOP, AffineGerm, CompositeGerm, GermMap, LinearGerm,
                                  MoebiusGerm, compose, holonomy_germ, identity_germ, lift_path)

NU_I = math.exp(-2 * math.pi)
UNIT = CirclePath()


class TestLift:
    def test_linear_unit_circle(self):
        r = lift_path(LocalLinearModel(1j), UNIT, 0.1)
        assert abs(r.endpoint - 0.1 * NU_I) < 1e-13
        assert abs(r.derivative - NU_I) < 1e-12

    def test_constant_path(self):
        f = lifted_demo_field()
        r = lift_path(f, ConstantPath(1.0), 0.3 + 0.1j)
        assert r.endpoint == 0.3 + 0.1j and r.derivative == 1

    def test_separatrix_invariant(self):
        r = lift_path(LocalLinearModel(0.3 + 1j), UNIT, 0.0)
        assert r.endpoint == 0

    def test_error_estimate_within_target(self):
        cfg = NumericConfig()
        r = lift_path(LocalLinearModel(0.2 + 0.5j), UNIT, 0.4)
        assert r.estimated_error <= cfg.ode_rel_tol * abs(r.endpoint) + cfg.ode_abs_tol

    def test_singular_encounter(self):
        # x' = x, y' = y: the segment from 1 to -1 passes through the node
        f = PolynomialVectorField([(1, 0, 1)], [(0, 1, 1j)])
        with pytest.raises(SingularEncounter):
            lift_path(f, PolylinePath([0, 1], [1, -1]), 0.5)

    def test_trace_on_leaf(self):
        lam = 0.25 + 0.75j
        r = lift_path(LocalLinearModel(lam), UNIT, 0.3)
        tr = r.trace
        assert tr.t[0] == 0 and tr.t[-1] == 1
        # w z^(-lambda) is a first integral along the continued branch
        expected = 0.3 * np.exp(2j * math.pi * lam * tr.t)
        assert np.max(np.abs(tr.w - expected)) < 1e-11


class TestHolonomyGerm:
    def test_linear_model_exact(self, rng):
        g = holonomy_germ(LocalLinearModel(1j), UNIT, CrossSection(0.5))
        for _ in range(10):
            w = 0.5 * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
            assert abs(g(w) - NU_I * w) < 1e-8

    def test_reversed(self):
        g = holonomy_germ(LocalLinearModel(1j), UNIT.reversed(), CrossSection(1e-3))
        w = 1e-3
        assert abs(g(w) - w / NU_I) < 1e-8 * abs(w / NU_I)

    def test_twice(self):
        lam = 0.1 + 0.3j
        nu = cmath.exp(2j * math.pi * lam)
        g = holonomy_germ(LocalLinearModel(lam), CirclePath(turns=2), CrossSection(0.5))
        assert abs(g(0.2j) - nu ** 2 * 0.2j) < 1e-9

    def test_round_trip(self, rng):
        f = lifted_demo_field(0.3, 0.6 + 0.2j)
        cfg = NumericConfig()
        for _ in range(5):
            w = complex(*rng.uniform(-0.3, 0.3, size=2))
            there = lift_path(f, STANDARD_LOOP, w).endpoint
            back = lift_path(f, STANDARD_LOOP.reversed(), there).endpoint
            assert abs(back - w) < 10 * (cfg.ode_rel_tol * abs(w) + cfg.ode_abs_tol) + 1e-12

    def test_derivative_matches_finite_differences(self, rng):
        h = 1e-6
        for _ in range(100):
            a = complex(*rng.uniform(-0.5, 0.5, size=2))
            b = cmath.rect(rng.uniform(0.2, 1.5), rng.uniform(-3, 3))
            f = lifted_demo_field(a, b)
            w = complex(*rng.uniform(-0.4, 0.4, size=2))
            d = lift_path(f, STANDARD_LOOP, w).derivative
            fd = (lift_path(f, STANDARD_LOOP, w + h).endpoint - lift_path(f, STANDARD_LOOP, w - h).endpoint) / (2 * h)
            assert abs(fd - d) <= 1e-5 * abs(d)

    def test_concatenation(self):
        lam = 0.4 + 0.6j
        model = LocalLinearModel(lam)
        p1 = CirclePath(turns=1)
        p2 = PolylinePath([0, 0.5, 1], [1, 1.3 + 0.2j, 1])
        w = 0.25
        step = lift_path(model, p2, lift_path(model, p1, w).endpoint).endpoint
        whole = lift_path(model, ConcatPath([p1, p2]), w).endpoint
        assert abs(step - whole) < 1e-9

    def test_lifted_demo_is_affine(self):
        a, b = 0.5, 0.2
        g = holonomy_germ(lifted_demo_field(a, b), STANDARD_LOOP, CrossSection(0.5))
        for w in (0, 0.3, -0.2 + 0.4j):
            assert abs(g(w) - (a + b * w)) < 1e-10
            assert abs(g.deriv(w) - b) < 1e-10


class TestCompose:
    def test_linear_linear(self):
        nu = 0.3 + 0.1j
        g = compose(LinearGerm(nu), LinearGerm(nu))
        assert isinstance(g, LinearGerm) and g.nu == nu * nu

    def test_affine_into_linear(self):
        nu = NU_I
        g = compose(LinearGerm(nu), AffineGerm(0.5, 0.2))
        assert isinstance(g, AffineGerm)
        assert g.a == pytest.approx(nu * 0.5) and g.b == pytest.approx(nu * 0.2)

    def test_identity_neutral(self):
        g = MoebiusGerm(0.5, 0.2, 1, 0.3)
        assert compose(g, identity_germ()) is g and compose(identity_germ(), g) is g

    def test_moebius_closed_form(self):
        g, f = MoebiusGerm(0.1, 1, 1, 0.2), AffineGerm(0.05, 0.5)
        h = compose(g, f)
        assert isinstance(h, MoebiusGerm)
        assert h(0.1j) == pytest.approx(g(f(0.1j)))

    def test_composite_chain_rule(self):
        f = lifted_demo_field()
        lifted = holonomy_germ(f, STANDARD_LOOP, CrossSection(0.5))
        h = compose(LinearGerm(0.5j), lifted)
        assert isinstance(h, CompositeGerm)
        v, d = h.evaluate(0.1)
        assert v == pytest.approx(0.5j * (0.5 + 0.02), rel=1e-10)
        assert d == pytest.approx(0.5j * 0.2, rel=1e-10)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            compose(AffineGerm(0, 1, domain_radius=0.1), AffineGerm(1.0, 0.5))


class TestGermKinds:
    def test_linear_eval(self):
        g = LinearGerm(0.3j)
        assert g(2) == 0.6j and g.deriv(5) == 0.3j

    def test_json_round_trip(self):
        for g in (LinearGerm(0.2j), AffineGerm(0.5, 0.2), MoebiusGerm(0.5, 0.2, 1, 0.3)):
            h = GermMap.from_json(g.to_json())
            assert h(0.1 + 0.1j) == pytest.approx(g(0.1 + 0.1j))

    @pytest.mark.parametrize("germ", [AffineGerm(0.5, 0.2), AffineGerm(0.1, 1.0),
                                      MoebiusGerm(0.5, 0.2, 1, 0.3)])
    def test_beta_curve_realizes_germ(self, germ):
        t, z, w = germ.beta_curve(0.1)
        assert z[0] == pytest.approx(1) and z[-1] == pytest.approx(1)
        assert w[0] == pytest.approx(0.1) and w[-1] == pytest.approx(germ(0.1), abs=1e-14)
        assert np.all(np.abs(z[1:-1]) > 1)

    def test_paths_from_json(self):
        p = BasePath.from_json({"kind": "circle", "turns": 2})
        assert p(0.25) == pytest.approx(-1)
        q = BasePath.from_json([[0, [1, 0]], [1, [2, 0]]])
        assert q(0.5) == pytest.approx(1.5)
