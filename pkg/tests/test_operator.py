from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qdeq.algebra import EvalContext, FracPowerSeries
from qdeq.errors import NonIntegerShiftPower, NotHorizontal, ParseError, ValidationError
from qdeq.operator import (
    QDiffOperator,
    SolutionObject,
    adams_substitute,
    apply,
    characteristic_equation,
    conjugate_by_character,
    format_operator,
    invert_variable,
    newton_polygon,
    operator_from_json,
    operator_to_json,
    parse_operator,
    pointwise_residual,
)
from qdeq.solver import QUINTIC

F = Fraction
FUCHSIAN = "(1 - S)^4 - Q*(1 - q^(1/5)*S)*(1 - q^(2/5)*S)*(1 - q^(3/5)*S)*(1 - q^(4/5)*S)"
NEWTON_EXAMPLE = "(Q^4 + 2*Q^7)*S^6 + (Q + 3*Q^5)*S^5 + (3 + 2*Q^3)*S^4 + 2*S^3 + 3*Q*S^2 + Q^2*S"


def poly_values(cp, ctx):
    return np.array([complex(c) for c in cp.coefficients(ctx)])


class TestParse:
    def test_constant_coefficients_commute(self):
        op = parse_operator("(1 - S)^2")
        assert op.terms == {(0, 0, 0): 1, (1, 0, 0): -2, (2, 0, 0): 1}

    def test_commutator(self):
        op = parse_operator("Q*S - S*Q")
        assert op.shifts == (1,)
        assert sorted(op.coefficient(1)) == [(F(1), F(0), 1), (F(1), F(1), -1)]

    def test_quintic_has_order_25(self):
        op = parse_operator(QUINTIC)
        assert op.order == 25
        assert op.shifts == tuple(range(0, 26, 5)) + tuple(sorted(set(range(1, 5)))) or 25 in op.shifts

    def test_fractional_q_exponent_exact(self):
        op = parse_operator("S - q^(3/7)*Q^(1/2)")
        assert op.coefficient(0) == [(F(1, 2), F(3, 7), -1)]

    @pytest.mark.parametrize("text", ["(1 - S", "1 + * S", "S^", "Q^(1/0)", "S @ Q"])
    def test_parse_errors(self, text):
        with pytest.raises(ValidationError):
            parse_operator(text)

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as info:
            parse_operator("(1 - S")
        assert info.value.position == 6

    @pytest.mark.parametrize("text", ["S^(1/2)", "S^-1"])
    def test_shift_power_must_be_nonnegative_integer(self, text):
        with pytest.raises(ValidationError):
            parse_operator(text)

    def test_format_roundtrip(self):
        for text in (QUINTIC, FUCHSIAN, NEWTON_EXAMPLE, "0.5*S - q^(-9/2)*Q^(3/4)"):
            op = parse_operator(text)
            assert parse_operator(format_operator(op)).terms == op.terms

    def test_json_roundtrip(self):
        op = parse_operator(FUCHSIAN)
        back = operator_from_json(operator_to_json(op))
        assert back.terms == op.terms and back.variable == op.variable

    def test_json_rejects_fractional_shift(self):
        with pytest.raises(NonIntegerShiftPower):
            operator_from_json({"terms": [{"shift": 0.5, "coeff": [{"re": 1}]}]})


class TestNewtonPolygon:
    def test_quintic(self):
        poly = newton_polygon(parse_operator(QUINTIC))
        assert poly.vertices == ((0, 1), (20, 0), (25, 0))
        (s1, s2) = poly.segments
        assert s1.slope == F(-1, 20) and s1.kind == "sloped"
        assert s2.slope == 0 and s2.kind == "horizontal"

    def test_example_operator_as_printed(self):
        # the operator as written puts a lattice point at (3, 0)
        poly = newton_polygon(parse_operator(NEWTON_EXAMPLE))
        assert poly.vertices == ((0, 4), (1, 1), (2, 0), (3, 0), (5, 2))

    def test_example_operator_with_constant_second_coefficient(self):
        op = parse_operator(NEWTON_EXAMPLE.replace("3*Q*S^2", "3*S^2"))
        assert newton_polygon(op).vertices == ((0, 4), (1, 1), (2, 0), (4, 0), (5, 2))

    def test_single_term(self):
        poly = newton_polygon(parse_operator("Q^2*S^3"))
        assert poly.segments == () and len(poly.vertices) == 1

    @given(st.dictionaries(st.integers(0, 6), st.integers(0, 6), min_size=2))
    def test_points_above_hull(self, pts):
        text = " + ".join(f"Q^{e}*S^{i}" for i, e in pts.items())
        poly = newton_polygon(parse_operator(text))
        slopes = [s.slope for s in poly.segments]
        assert slopes == sorted(slopes) and len(set(slopes)) == len(slopes)
        for s in poly.segments:
            for x, y in poly.points:
                assert F(y) >= s.start[1] + s.slope * (x - s.start[0])


class TestCharacteristic:
    def test_quintic_at_zero(self):
        cp = characteristic_equation(parse_operator(QUINTIC))
        ctx = EvalContext(0.5)
        assert np.allclose(poly_values(cp, ctx), [1, -5, 10, -10, 5, -1])

    def test_quintic_at_infinity(self):
        ctx = EvalContext(0.5)
        cp = characteristic_equation(invert_variable(parse_operator(QUINTIC)))
        assert cp.degree == 25
        for l in range(1, 6):
            for m in range(5):
                x = ctx.root_of_unity(m, 5) * 0.5 ** (l / 5)
                assert abs(cp.evaluate(x, ctx)) < 1e-10

    def test_fuchsian_at_infinity_roots(self):
        ctx = EvalContext(0.5)
        cp = characteristic_equation(invert_variable(parse_operator(FUCHSIAN)))
        roots = sorted(cp.roots(ctx), key=abs)
        assert np.allclose(roots, [0.5 ** (i / 5) for i in (4, 3, 2, 1)])

    def test_sloped_segment_rejected(self):
        op = parse_operator(QUINTIC)
        with pytest.raises(NotHorizontal):
            characteristic_equation(op, newton_polygon(op).segments[0])

    def test_solution_count(self):
        op = parse_operator(QUINTIC)
        poly = newton_polygon(op)
        width = sum(s.end[0] - s.start[0] for s in poly.segments)
        assert characteristic_equation(op).degree + 20 == width == 25


class TestTransforms:
    def test_inverse_is_involution(self):
        op = parse_operator(FUCHSIAN)
        back = invert_variable(invert_variable(op))
        assert back.variable == "Q" and back.terms == op.terms
        quintic = parse_operator(QUINTIC)
        assert invert_variable(invert_variable(quintic)).terms == quintic.terms

    def test_inverted_operator_kills_inverted_function(self):
        # f(Q) = 1/(1 - Q) solves (1 - Q) - (1 - qQ) S; g(w) = f(1/w) must solve the inverted operator
        ctx = EvalContext(0.5)
        op = parse_operator("(1 - Q) - (1 - q*Q)*S")
        f = lambda Q: 1 / (1 - Q)
        assert pointwise_residual(op, f, 0.37, ctx) < 1e-14
        assert pointwise_residual(invert_variable(op), lambda w: f(1 / w), 0.37, ctx) < 1e-14

    def test_quintic_inverted_form(self):
        # prod_k (1 - q^(-k) S^5) - q^10 w S^20 (1 - S)^5
        w = invert_variable(parse_operator(QUINTIC))
        ref = parse_operator("(1 - q^(-1)*S^5)*(1 - q^(-2)*S^5)*(1 - q^(-3)*S^5)*(1 - q^(-4)*S^5)*(1 - q^(-5)*S^5)"
                             " - q^10*w*S^20*(1 - S)^5", variable="w")
        assert w.terms == ref.terms

    def test_adams_substitution_characteristic(self):
        z = adams_substitute(parse_operator(QUINTIC), 20, 1)
        cp = characteristic_equation(z)
        assert cp.terms == {25: ((1, F(0)),), 5: ((-1, F(-1, 2)),)}

    def test_adams_identity(self):
        op = parse_operator(FUCHSIAN)
        assert adams_substitute(op, 1, 0).terms == op.terms

    def test_conjugation_identity(self):
        op = parse_operator(FUCHSIAN)
        assert conjugate_by_character(op, 1).terms == op.terms

    def test_conjugation_residual_equivalence(self):
        ctx = EvalContext(0.5)
        op = invert_variable(parse_operator(FUCHSIAN))
        lam = 0.5 ** 0.2
        F_ = FracPowerSeries.from_coeffs([1, 0.3, -0.2, 0.1, 0.05, 0.01])
        r1 = apply(op, SolutionObject(lam, F_, variable="w"), ctx)
        r2 = apply(conjugate_by_character(op, lam), SolutionObject(1, F_, variable="w"), ctx)
        assert np.allclose(np.array(r1.coeffs, complex), np.array(r2.coeffs, complex), atol=1e-13)


class TestApply:
    def test_constant_killed_by_one_minus_shift(self):
        ctx = EvalContext(0.5)
        r = apply(parse_operator("1 - S"), SolutionObject(1, FracPowerSeries.from_coeffs([1, 0, 0])), ctx)
        assert all(abs(c) < 1e-15 for c in r.coeffs)

    def test_zero_series(self):
        ctx = EvalContext(0.5)
        r = apply(parse_operator(FUCHSIAN), SolutionObject(1, FracPowerSeries.from_coeffs([0] * 6)), ctx)
        assert all(c == 0 for c in r.coeffs)

    @given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.lists(st.floats(-1, 1), min_size=6, max_size=6),
           st.floats(-2, 2), st.floats(-2, 2))
    def test_linearity(self, f, g, a, b):
        ctx = EvalContext(0.5)
        op = parse_operator(FUCHSIAN)
        Fs, Gs = FracPowerSeries.from_coeffs(f), FracPowerSeries.from_coeffs(g)
        lhs = apply(op, SolutionObject(1, Fs * a + Gs * b), ctx)
        rhs = apply(op, SolutionObject(1, Fs), ctx) * a + apply(op, SolutionObject(1, Gs), ctx) * b
        scale = 1 + max(abs(x) for x in lhs.coeffs)
        assert all(abs(x - y) <= 1e-12 * scale * 50 for x, y in zip(lhs.coeffs, rhs.coeffs))
