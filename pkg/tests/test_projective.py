import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holocycles.core import PolynomialVectorField, linear_field
from holocycles.errors import ContractionViolated, InvariantLine, NotInvariantLine
from holocycles.projective import (Line, broken_connection_check, characteristic_number,
                                   count_tangencies, infinity_singularities, random_field)
from holocycles.transport import AffineGerm


class TestInfinity:
    @pytest.mark.parametrize("lam", [2.0, 0.3 + 0.7j, -1.5j])
    def test_linear(self, lam):
        pts = infinity_singularities(linear_field(1, 0, 0, lam))
        assert len(pts) == 2
        at_x = next(p for p in pts if p.chart == "u")
        assert at_x.coordinate == 0 and at_x.lambda_j == pytest.approx(-1 / (lam - 1))

    def test_dicritical(self):
        with pytest.raises(NotInvariantLine):
            infinity_singularities(linear_field(1, 0, 0, 1))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_count(self, n, rng):
        for _ in range(100):
            pts = infinity_singularities(random_field(n, rng))
            assert sum(p.multiplicity for p in pts) == n + 1
            assert all(p.generic for p in pts)

    def test_multiple_root_flagged(self):
        # x' = x^2, y' = 2 x y + y^2 gives h(u) = u^2 (double root at u = 0)
        f = PolynomialVectorField([(2, 0, 1)], [(1, 1, 1), (0, 2, 1)])
        pts = infinity_singularities(f)
        assert sum(p.multiplicity for p in pts) == 3
        double = [p for p in pts if p.multiplicity == 2]
        assert double and double[0].lambda_j is None and not double[0].generic

    def test_chart_consistency(self, rng):
        for _ in range(50):
            f = random_field(3, rng)
            for p in infinity_singularities(f):
                if p.chart == "u" and abs(p.coordinate) > 1e-3:
                    other = characteristic_number(f, 1 / p.coordinate, "s")
                    assert abs(other - p.lambda_j) <= 1e-9 * abs(p.lambda_j)

    def test_dehomogenized_jacobian(self):
        lam = 0.3 + 0.7j
        p = next(p for p in infinity_singularities(linear_field(1, 0, 0, lam)) if p.chart == "u")
        assert np.allclose(p.jacobian, np.diag([lam - 1, -1]))


class TestTangency:
    def test_example(self):
        tc = count_tangencies(linear_field(1, 0, 0, 2), Line.graph(1, 1))
        assert tc.affine == 1
        assert tc.points[0] == pytest.approx((-2, -1))

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_class_b(self, n, rng):
        for _ in range(100):
            f = random_field(n - 1, rng)
            line = Line(tuple(complex(*rng.normal(size=2)) for _ in range(2)),
                        tuple(complex(*rng.normal(size=2)) for _ in range(2)))
            tc = count_tangencies(f, line)
            assert tc.affine == n - 1 and tc.b_class == n

    def test_invariant_line(self):
        f = PolynomialVectorField([(1, 0, 1)], [(0, 1, 1), (1, 1, 2)])
        with pytest.raises(InvariantLine):
            count_tangencies(f, Line.graph(0, 0))


class TestConnection:
    def test_broken(self):
        r = broken_connection_check(AffineGerm(0, 0.5), AffineGerm(0.1, 0.5))
        assert r.verdict == "assumptions-satisfied"
        assert r.O_P == 0 and r.O_Q == pytest.approx(0.2) and r.displacement == 0.1

    def test_unbroken(self):
        assert broken_connection_check(AffineGerm(0, 0.5), AffineGerm(0, 0.5)).verdict == "unbroken"

    def test_expanding(self):
        with pytest.raises(ContractionViolated):
            broken_connection_check(AffineGerm(0, 0.5), AffineGerm(0, 2))

    @settings(max_examples=50, deadline=None)
    @given(st.complex_numbers(max_magnitude=0.3), st.complex_numbers(max_magnitude=0.3),
           st.complex_numbers(max_magnitude=0.6), st.complex_numbers(max_magnitude=0.6))
    def test_swap_symmetry(self, a1, a2, b1, b2):
        f, g = AffineGerm(a1, b1), AffineGerm(a2, b2)
        r, s = broken_connection_check(f, g), broken_connection_check(g, f)
        assert (r.verdict == "unbroken") == (s.verdict == "unbroken")
        assert r.O_P == pytest.approx(s.O_Q, abs=1e-12) and r.O_Q == pytest.approx(s.O_P, abs=1e-12)
