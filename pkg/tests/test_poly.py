"""Exact polynomial layer: frozen desk values plus seeded randomized laws."""

from fractions import Fraction

import pytest

from pcflab import poly
from pcflab.poly import HomPoly, PolynomialError

import property_suites as ps


def _p(nvars, degree, terms):
    return HomPoly(nvars, degree, terms)


X2, Y2 = (2, 0), (0, 2)
XY = (1, 1)


class TestConstruction:
    def test_rejects_wrong_degree_sum(self):
        with pytest.raises(PolynomialError):
            _p(2, 2, {(1, 0): 1})

    def test_rejects_negative_exponent(self):
        with pytest.raises(PolynomialError):
            _p(2, 0, {(-1, 1): 1})

    def test_rejects_single_variable(self):
        with pytest.raises(PolynomialError):
            _p(1, 1, {(1,): 1})

    def test_zero_coefficients_dropped(self):
        p = _p(2, 2, {X2: 0, Y2: 3})
        assert p.terms == {Y2: Fraction(3)}

    def test_zero_keeps_degree_tag(self):
        z = poly.zero(2, 3)
        assert z.is_zero() and z.degree == 3
        assert poly.partial(z, 0).degree == 2

    def test_monomial_variable_constant(self):
        assert poly.variable(3, 1) == _p(3, 1, {(0, 1, 0): 1})
        assert poly.monomial(2, (1, 1), 5) == _p(2, 2, {XY: 5})
        assert poly.constant(2, Fraction(7, 2)).degree == 0


class TestArithmetic:
    def test_product_difference_of_squares(self):
        x_plus_y = poly.linear_form([1, 1])
        x_minus_y = poly.linear_form([1, -1])
        assert x_plus_y * x_minus_y == _p(2, 2, {X2: 1, Y2: -1})

    def test_square_binomial(self):
        x_plus_y = poly.linear_form([1, 1])
        assert x_plus_y * x_plus_y == _p(2, 2, {X2: 1, XY: 2, Y2: 1})

    def test_partial_derivative(self):
        p = _p(3, 3, {(2, 1, 0): 1})  # x^2 y
        assert poly.partial(p, 0) == _p(3, 2, {(1, 1, 0): 2})
        assert poly.partial(p, 2) == poly.zero(3, 2)

    def test_evaluate_exact(self):
        p = _p(2, 2, {X2: 1, Y2: -1})
        assert p.evaluate((Fraction(3), Fraction(2))) == 5

    def test_compose_squares(self):
        p = _p(2, 2, {X2: 1, Y2: 1})
        q = poly.compose(p, [poly.monomial(2, X2), poly.monomial(2, Y2)])
        assert q == _p(2, 4, {(4, 0): 1, (0, 4): 1})


class TestNormalization:
    def test_canonical_clears_denominators_and_sign(self):
        p = _p(2, 1, {(1, 0): Fraction(-1, 2), (0, 1): Fraction(1, 3)})
        assert poly.canonical(p) == _p(2, 1, {(1, 0): 3, (0, 1): -2})

    def test_int_primitive_removes_content(self):
        p = _p(2, 2, {X2: 4, Y2: -6})
        assert poly.int_primitive(p) == _p(2, 2, {X2: 2, Y2: -3})

    def test_canonical_idempotent(self):
        p = _p(2, 2, {X2: 4, XY: -2})
        assert poly.canonical(poly.canonical(p)) == poly.canonical(p)


class TestDivisionAndGcd:
    def test_exact_divide_round_trip(self):
        a = _p(2, 2, {X2: 1, XY: 1})
        b = poly.linear_form([2, -3])
        assert poly.exact_divide(a * b, b) == a

    def test_exact_divide_rejects_nondivisor(self):
        a = _p(2, 2, {X2: 1, Y2: 1})
        assert poly.exact_divide(a, poly.linear_form([1, 1])) is None

    def test_gcd_of_shifted_products(self):
        u = poly.linear_form([1, 1])
        v = poly.linear_form([1, -1])
        g = poly.gcd(u * u * v, u * v * v)
        assert g == poly.canonical(u * v)

    def test_gcd_coprime_is_constant(self):
        assert poly.gcd(poly.linear_form([1, 1]),
                        poly.linear_form([1, -1])).is_constant()

    def test_squarefree_part_strips_multiplicity(self):
        u = poly.linear_form([1, 1])
        v = poly.linear_form([1, -1])
        assert poly.squarefree_part(u * u * v) == poly.canonical(u * v)


class TestResultants:
    def test_linear_pair_value_matches_root_oracle(self):
        # Res(x - 2y, x - 3y) up to sign is the second form at the first
        # form's root (2, 1): 2 - 3 = -1.
        a = poly.linear_form([1, -2])
        b = poly.linear_form([1, -3])
        r = poly.resultant_wrt(a, b, 0)
        assert abs(r.evaluate((Fraction(1), Fraction(1)))) == 1

    def test_vanishes_exactly_on_shared_root(self):
        a = poly.linear_form([1, -2])
        assert poly.resultant_wrt(a, a * a, 0).is_zero()

    def test_requires_positive_degree(self):
        with pytest.raises(PolynomialError):
            poly.resultant_wrt(poly.variable(2, 1), poly.variable(2, 0), 0)

    def test_formal_degrees_must_cover_actual(self):
        a = _p(2, 2, {X2: 1, Y2: 1})
        with pytest.raises(PolynomialError):
            poly.resultant_formal(a, a, 0, 1, 2)

    def test_formal_equals_actual_at_matching_degrees(self):
        a = _p(2, 2, {X2: 1, Y2: -2})
        b = _p(2, 2, {X2: 1, XY: 1, Y2: 1})
        assert poly.resultant_formal(a, b, 0, 2, 2) == poly.resultant_wrt(a, b, 0)

    def test_padded_matches_wrt_at_full_degrees(self):
        a = _p(2, 2, {X2: 1, Y2: -2})
        b = _p(2, 1, {(1, 0): 1, (0, 1): 1})
        assert poly.padded_resultant(a, b, 0) == poly.resultant_wrt(a, b, 0)

    def test_det_two_by_two(self):
        x, y = poly.variable(2, 0), poly.variable(2, 1)
        assert poly.det([[x, y], [y, x]]) == _p(2, 2, {X2: 1, Y2: -1})


class TestLinearFactors:
    def test_splits_rational_part(self):
        a = poly.linear_form([1, -2])
        b = poly.linear_form([1, 3])
        resid = _p(2, 2, {X2: 1, XY: 1, Y2: 1})
        factors, residual = poly.linear_factors(a * b * resid)
        got = sorted((f for f, _ in factors), key=lambda f: f.sort_key())
        want = sorted([poly.canonical(a), poly.canonical(b)],
                      key=lambda f: f.sort_key())
        assert got == want
        assert all(m == 1 for _, m in factors)
        assert residual == poly.canonical(resid)

    def test_multiplicity_counted(self):
        a = poly.linear_form([2, -1])
        factors, residual = poly.linear_factors(a * a)
        assert factors == [(poly.canonical(a), 2)]
        assert residual.is_constant()

    def test_irrational_roots_stay_in_residual(self):
        p = _p(2, 2, {X2: 1, Y2: -2})  # roots +-sqrt(2)
        factors, residual = poly.linear_factors(p)
        assert factors == []
        assert residual == p


class TestRandomizedLaws:
    """Smoke-level volume here; full 500-instance runs live in acceptance."""

    def test_ring_axioms(self):
        assert ps.suite_ring_axioms(n=60) >= 60

    def test_compose_degree(self):
        assert ps.suite_compose_degree(n=60) >= 60

    def test_exact_divide(self):
        assert ps.suite_exact_divide(n=60) >= 60

    def test_gcd_associate(self):
        assert ps.suite_gcd_associate(n=60) >= 60

    def test_squarefree(self):
        assert ps.suite_squarefree(n=60) >= 60

    def test_resultant_gcd(self):
        assert ps.suite_resultant_gcd(n=60) >= 60

    def test_linear_factors(self):
        assert ps.suite_linear_factors(n=60) >= 60
