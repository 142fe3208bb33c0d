import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from qdeq.algebra import EvalContext, NilpotentPoly
from qdeq.errors import MultipleRoot, PreconditionError, ResonantAlphas, ValidationError
from qdeq.operator import (
    QMonomial,
    characteristic_equation,
    invert_variable,
    parse_operator,
    pointwise_residual,
    relative_residual,
)
from qdeq.qspecial import qhyper, qlog
from qdeq.solver import (
    QUINTIC,
    adams_solve,
    apply_kgroup,
    assemble_log_solutions,
    check_nonresonant,
    extract_Xb,
    frobenius_solve,
    kgroup_series,
    mbw_operator,
    quintic_ifunction,
    quintic_infinity_closed_form,
    w_solution_explicit,
    w_tilde_value,
)

FUCHSIAN = "(1 - S)^4 - Q*(1 - q^(1/5)*S)*(1 - q^(2/5)*S)*(1 - q^(3/5)*S)*(1 - q^(4/5)*S)"


def fuchsian_alphas(ctx):
    return [ctx.qpow(Fraction(i, 5)) for i in range(1, 5)]


@pytest.fixture(scope="module")
def quintic():
    return parse_operator(QUINTIC)


class TestFrobenius:
    def test_trivial_first_order(self):
        ctx = EvalContext(0.5)
        op = parse_operator("1 - 2*S")
        sol = frobenius_solve(op, 0.5, 5, ctx)
        assert sol.series.coeffs[0] == 1 and all(c == 0 for c in sol.series.coeffs[1:])

    def test_not_a_root(self):
        with pytest.raises(ValidationError):
            frobenius_solve(parse_operator(FUCHSIAN), 0.3, 5, EvalContext(0.5))

    def test_multiple_root_directs_to_nilpotent_route(self, quintic):
        with pytest.raises(MultipleRoot):
            frobenius_solve(quintic, 1, 5, EvalContext(0.5))

    @pytest.mark.parametrize("l,m", [(1, 0), (2, 3), (5, 1)])
    def test_quintic_infinity_closed_form(self, quintic, l, m):
        ctx = EvalContext(0.5, backend="mpmath")
        lam = QMonomial(ctx.root_of_unity(m, 5), Fraction(l, 5))
        sol = frobenius_solve(invert_variable(quintic), lam, 15, ctx)
        ref = quintic_infinity_closed_form(l, m, 15, ctx)
        got = [sol.series.coefficient(d) for d in range(16)]
        assert max(float(abs(a - b) / abs(b)) for a, b in zip(got, ref)) < 1e-11
        assert relative_residual(invert_variable(quintic), sol, ctx) < 1e-10

    def test_fuchsian_infinity_is_4phi3(self):
        ctx = EvalContext(0.5)
        q = 0.5
        a1 = q ** 0.2
        sol = frobenius_solve(invert_variable(parse_operator(FUCHSIAN)), a1, 12, ctx)
        with mpmath.workdps(30):
            for d in range(13):
                num = mpmath.qp(a1, q, d) ** 4
                den = mpmath.qp(q, q, d) * mpmath.qp(q**0.8, q, d) * mpmath.qp(q**0.6, q, d) * mpmath.qp(q**0.4, q, d)
                ref = complex(num / den * q ** (2 * d))
                assert abs(sol.series.coefficient(d) - ref) <= 1e-12 * max(1, abs(ref))


class TestClosedFormAtInfinity:
    def test_quintic_alphas_reproduce_closed_form(self):
        ctx = EvalContext(0.5, backend="mpmath")
        alphas = [ctx.root_of_unity(l, 5) * ctx.qpow(Fraction(k, 5)) for l in range(5) for k in range(1, 6)]
        for (k, m) in [(1, 0), (3, 2)]:
            j = alphas.index(next(a for a in alphas if abs(a - ctx.root_of_unity(m, 5) * ctx.qpow(Fraction(k, 5))) < 1e-12))
            ws = w_solution_explicit(j, alphas, 5, 12, ctx).series.coeffs
            ref = quintic_infinity_closed_form(k, m, 12, ctx)
            assert max(float(abs(a - b) / abs(b)) for a, b in zip(ws, ref)) < 1e-11

    def test_leading_coefficient(self):
        ctx = EvalContext(0.5)
        assert w_solution_explicit(0, [0.3, 0.6j, -0.4], 2, 4, ctx).series.coeffs[0] == 1

    def test_needs_m_at_least_n(self):
        with pytest.raises(PreconditionError):
            w_solution_explicit(0, [0.3], 2, 4, EvalContext(0.5))

    @given(st.integers(1, 3), st.integers(0, 2), st.lists(st.tuples(st.floats(0.2, 0.9), st.floats(-3, 3)),
                                                          min_size=6, max_size=6), st.floats(0.3, 0.7))
    def test_explicit_equals_recursion(self, n, extra, polar, q):
        m = n + extra
        ctx = EvalContext(q)
        alphas = [r * cmath.exp(1j * t) for r, t in polar[:m]]
        assume(check_nonresonant(alphas, ctx))
        assume(min(abs(a - b) for i, a in enumerate(alphas) for b in alphas[i + 1:]) > 1e-2 if m > 1 else True)
        op = invert_variable(mbw_operator(alphas, n))
        for j in range(m):
            w = w_solution_explicit(j, alphas, n, 8, ctx).series.coeffs
            f = frobenius_solve(op, alphas[j], 8, ctx).series.coeffs
            scale = max(abs(x) for x in w)
            assert max(abs(a - b) for a, b in zip(w, f)) < 1e-11 * scale

    def test_coefficient_ratios_decay(self):
        ctx = EvalContext(0.5, backend="mpmath")
        c = quintic_infinity_closed_form(1, 0, 25, ctx)
        ratios = [abs(c[d + 1] / c[d]) for d in range(10, 25)]
        assert all(b < a for a, b in zip(ratios, ratios[1:]))

    def test_w_tilde_continuation_consistent(self):
        # m = n: inside the disc the sum and the continued value must agree
        ctx = EvalContext(0.5)
        alphas = fuchsian_alphas(ctx)
        Q = 40.0
        direct = sum(c * (1 / Q) ** d for d, c in enumerate(w_solution_explicit(0, alphas, 4, 60, ctx).series.coeffs))
        assert abs(w_tilde_value(0, alphas, 4, Q, ctx) - direct) < 1e-13


class TestNonresonance:
    def test_fractional_powers(self):
        ctx = EvalContext(0.5)
        assert check_nonresonant([ctx.qpow(Fraction(1, 5)), ctx.qpow(Fraction(2, 5))], ctx)

    def test_integer_ratio(self):
        assert not check_nonresonant([0.3, 0.15], EvalContext(0.5))

    def test_far_integer_ratio(self):
        ctx = EvalContext(0.5)
        assert not check_nonresonant([1, 0.5**7], ctx, K_max=10)

    def test_resonant_alphas_raise(self):
        with pytest.raises(ResonantAlphas):
            w_solution_explicit(0, [0.3, 0.15], 2, 5, EvalContext(0.5))


class TestAdams:
    def test_residual_and_normalisation(self, quintic):
        ctx = EvalContext(0.5)
        sol = adams_solve(quintic, 20, 1, 1, 40, ctx)
        assert sol.series.coeffs[0] == 1
        assert relative_residual(quintic, sol, ctx) < 1e-10
        assert sol.theta_exponent == Fraction(1, 20)

    def test_characters_distinct(self, quintic):
        ctx = EvalContext(0.5)
        chars = []
        for k in range(20):
            sol = adams_solve(quintic, 20, 1, ctx.root_of_unity(k, 20), 2, ctx)
            chars.append(complex(sol.character_value(ctx)))
        gaps = [abs(a - b) for i, a in enumerate(chars) for b in chars[i + 1:]]
        # Vandermonde determinant is the product of the gaps
        assert min(gaps) > 1e-2

    def test_root_is_xi_p_minus_half(self, quintic):
        ctx = EvalContext(0.5)
        sol = adams_solve(quintic, 20, 1, 1, 2, ctx)
        assert isinstance(sol.character, QMonomial) and sol.character.q_exp == Fraction(-1, 40)


class TestKGroup:
    def test_unit_at_degree_zero(self):
        ctx = EvalContext(0.5)
        ks = kgroup_series(fuchsian_alphas(ctx), 4, 5, ctx)
        assert list(ks.coeff_series[0]) == [1, 0, 0, 0]

    def test_constant_component_is_4phi3(self):
        ctx = EvalContext(0.5)
        alphas = fuchsian_alphas(ctx)
        ks = kgroup_series(alphas, 4, 60, ctx)
        ref = qhyper(alphas, [0.5, 0.5, 0.5], ctx, 0.2, N=60).value
        assert abs(extract_Xb(ks).values(0.2, ctx)[0] - ref) < 1e-14

    def test_quintic_constant_component(self):
        ctx = EvalContext(0.5)
        ks = quintic_ifunction(6, ctx)
        for d in range(7):
            ref = np.prod([1 - 0.5**k for k in range(1, 5 * d + 1)]) / np.prod([1 - 0.5**k for k in range(1, d + 1)]) ** 5
            assert abs(ks.coeff_series[d][0] - ref) < 1e-12 * ref

    def test_quintic_nilpotent_form_matches_generic(self):
        ctx = EvalContext(0.5)
        a = quintic_ifunction(10, ctx)
        b = kgroup_series(a.alphas, 5, 10, ctx)
        for x, y in zip(a.coeff_series, b.coeff_series):
            assert max(abs(u - v) for u, v in zip(x, y)) < 1e-9 * max(1, x.max_abs())

    @pytest.mark.parametrize("q", [0.3, 0.5, 0.7])
    def test_quintic_residual(self, quintic, q):
        ctx = EvalContext(q)
        res, scales = apply_kgroup(quintic, quintic_ifunction(30, ctx), ctx)
        worst = max(abs(r[b]) / s[b] for r, s in zip(res, scales) for b in range(5) if s[b])
        assert worst < 1e-10

    def test_reassemble(self):
        ctx = EvalContext(0.5)
        ks = kgroup_series(fuchsian_alphas(ctx), 4, 8, ctx)
        back = extract_Xb(ks).reassemble()
        assert all(list(a) == list(b) for a, b in zip(back, ks.coeff_series))

    def test_first_order_component_against_H_derivative(self):
        # X_1 at Q^1 is -(d/dP) of prod (1 - P a_i)/(1 - P q)^4 at P = 1; take P = q^H
        ctx = EvalContext(0.5)
        alphas = fuchsian_alphas(ctx)
        ks = kgroup_series(alphas, 4, 2, ctx)
        c = lambda H: np.prod([1 - 0.5**H * a for a in alphas]) / (1 - 0.5 ** (H + 1)) ** 4
        h = 1e-4
        dH = (c(h) - c(-h)) / (2 * h)
        assert abs(ks.coeff_series[1][1] - (-dH / math.log(0.5))) < 1e-7


class TestLogSolutions:
    def test_first_two(self):
        ctx = EvalContext(0.5)
        xb = extract_Xb(kgroup_series(fuchsian_alphas(ctx), 4, 120, ctx))
        Q = 0.3 + 0.1j
        X = xb.values(Q, ctx)
        G = assemble_log_solutions(xb, Q, ctx)
        assert G[0] == X[0]
        assert abs(G[1] - (-qlog(Q, ctx) * X[0] + X[1])) < 1e-14

    @pytest.mark.parametrize("m", range(4))
    def test_solutions_satisfy_equation(self, m):
        ctx = EvalContext(0.5)
        op = parse_operator(FUCHSIAN)
        xb = extract_Xb(kgroup_series(fuchsian_alphas(ctx), 4, 150, ctx))
        f = lambda Q: assemble_log_solutions(xb, Q, ctx)[m]
        assert pointwise_residual(op, f, 0.3 + 0.1j, ctx) < 1e-9

    def test_components_alone_are_not_solutions(self):
        ctx = EvalContext(0.5)
        op = parse_operator(FUCHSIAN)
        xb = extract_Xb(kgroup_series(fuchsian_alphas(ctx), 4, 150, ctx))
        assert pointwise_residual(op, lambda Q: xb.values(Q, ctx)[2], 0.3 + 0.1j, ctx) > 1e-3
