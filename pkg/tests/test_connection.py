import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from qdeq.algebra import EvalContext
from qdeq.connection import (
    birkhoff_coefficients,
    cap_F,
    cap_G,
    connection_matrix_fuchsian,
    csc_sum_check,
    direct_Xb,
    fuchsian_alphas,
    fuchsian_phi43_check,
    helper_sums,
    mbw_check,
    mbw_lhs,
    mbw_rhs,
    phi43_transform_check,
)
from qdeq.errors import PoleAtLattice, PoleInSum, PreconditionError
from qdeq.qspecial import qhyper
from qdeq.solver import check_nonresonant


def rel(a, b):
    return abs(a - b) / max(abs(a), 1e-300)


def taylor_by_cauchy(f, order=4, radius=0.05, points=64):
    """Taylor coefficients of f about 0 from the trapezoid rule on a circle."""
    with mpmath.workdps(30):
        vals = [f(radius * mpmath.expjpi(2 * mpmath.mpf(j) / points)) for j in range(points)]
        out = []
        for k in range(order):
            s = mpmath.fsum(v * mpmath.expjpi(-2 * mpmath.mpf(j * k) / points) for j, v in enumerate(vals))
            out.append(complex(s / points / radius**k))
    return out


class TestHelperSums:
    def test_f1_at_zero(self):
        assert helper_sums(0, EvalContext(0.5), "f1") == 0

    def test_f2_against_double_sum(self):
        x, q = 0.3, 0.5
        u = [x * q**k / (1 - x * q**k) for k in range(61)]
        ref = sum(u[i] * u[j] for i in range(61) for j in range(i + 1, 61))
        assert abs(helper_sums(x, EvalContext(q), "f2") - ref) < 1e-12

    def test_f3_against_triple_sum(self):
        x, q = 0.3 + 0.2j, 0.5
        u = [x * q**k / (1 - x * q**k) for k in range(40)]
        ref = sum(u[i] * u[j] * u[l] for i in range(40) for j in range(i + 1, 40) for l in range(j + 1, 40))
        assert abs(helper_sums(x, EvalContext(q), "f3") - ref) < 1e-12

    def test_g1_vanishes_when_x_squared_is_q(self):
        ctx = EvalContext(0.5)
        assert abs(helper_sums(math.sqrt(0.5), ctx, "g1")) < 1e-14

    def test_pole(self):
        with pytest.raises(PoleInSum):
            helper_sums(2.0, EvalContext(0.5), "f1")


class TestExpansionCoefficients:
    def test_F_against_cauchy_oracle(self):
        q = 0.5
        ctx = EvalContext(q)
        alphas = fuchsian_alphas(ctx)

        def f(e):
            P = 1 - e
            num = mpmath.fprod(mpmath.qp(P * a, q) for a in alphas)
            return num / mpmath.qp(P * q, q) ** 4

        c = taylor_by_cauchy(f)
        ref = [c[k] / c[0] for k in (1, 2, 3)]
        got = cap_F(alphas, ctx)
        assert max(abs(a - b) for a, b in zip(got, ref)) < 1e-6

    def test_F_first_coefficient_sign(self):
        # the first coefficient is sum_i f1(a_i) - n f1(q)
        ctx = EvalContext(0.5)
        alphas = fuchsian_alphas(ctx)
        F1 = sum(helper_sums(a, ctx, "f1") for a in alphas) - 4 * helper_sums(0.5, ctx, "f1")
        assert abs(cap_F(alphas, ctx)[0] - F1) < 1e-14

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    @pytest.mark.parametrize("Q", [0.2, 0.3 + 0.4j])
    def test_G_against_cauchy_oracle(self, k, Q):
        q = 0.5
        ctx = EvalContext(q)
        x0 = q ** (k / 5)
        x = x0 * Q

        def g(e):
            P = 1 - e
            return (mpmath.qp(P * x, q) * mpmath.qp(q / (P * x), q)) / (mpmath.qp(P * x0, q) * mpmath.qp(q / (P * x0), q))

        c = taylor_by_cauchy(g)
        ref = [c[j] / c[0] for j in (1, 2, 3)]
        got = cap_G(Fraction(k, 5), Q, ctx)
        assert max(abs(a - b) for a, b in zip(got, ref)) < 1e-6 * max(1, max(abs(r) for r in ref))

    def test_G1_is_difference_of_g1(self):
        ctx = EvalContext(0.5)
        x0 = ctx.qpow(Fraction(2, 5))
        G1 = cap_G(Fraction(2, 5), 0.2, ctx)[0]
        assert abs(G1 - (helper_sums(x0 * 0.2, ctx, "g1") - helper_sums(x0, ctx, "g1"))) < 1e-15


class TestContinuationIdentity:
    def test_single_parameter(self):
        ctx = EvalContext(0.5)
        ev = mbw_check([0.3 + 0.2j], 1, 0.2, ctx)
        assert ev.residual < 1e-10

    def test_fuchsian(self):
        ctx = EvalContext(0.5)
        ev = mbw_check(fuchsian_alphas(ctx), 4, 0.2, ctx)
        assert ev.residual < 1e-8

    def test_lhs_constant_component_is_4phi3(self):
        ctx = EvalContext(0.5)
        alphas = fuchsian_alphas(ctx)
        lhs = mbw_lhs(alphas, 4, 0.2, None, ctx)
        assert abs(lhs[0] - qhyper(alphas, [0.5] * 3, ctx, 0.2).value) < 1e-14

    def test_rhs_constant_component_is_scalar_transformation(self):
        ctx = EvalContext(0.5)
        rhs = mbw_rhs(fuchsian_alphas(ctx), 4, 0.2, None, ctx)
        assert rel(rhs[0], fuchsian_phi43_check(0.2, ctx)[1]) < 1e-12

    def test_needs_m_at_least_n(self):
        with pytest.raises(PreconditionError):
            mbw_rhs([0.3], 2, 0.2, None, EvalContext(0.5))

    def test_lattice_pole(self):
        with pytest.raises(PoleAtLattice):
            mbw_rhs([0.3, 0.4j], 2, 0.25, None, EvalContext(0.5))

    def test_lhs_needs_unit_disc(self):
        with pytest.raises(PreconditionError):
            mbw_lhs([0.3], 1, 1.5, None, EvalContext(0.5))

    def test_escalation_for_ill_conditioned_instance(self):
        ctx = EvalContext(0.5)
        alphas = [0.85 + 0.1j, 0.8 - 0.2j, -0.3 + 0.7j, 0.2 - 0.75j]
        ev = mbw_check(alphas, 4, 0.2, ctx, target=1e-7)
        assert ev.residual < 1e-7
        assert ev.precision >= 53

    @settings(max_examples=6)
    @given(st.integers(1, 3), st.integers(0, 2),
           st.lists(st.tuples(st.floats(0.2, 0.9), st.floats(-3.1, 3.1)), min_size=5, max_size=5),
           st.floats(0.1, 0.5), st.floats(-math.pi + 0.2, math.pi - 0.2), st.floats(0.3, 0.7))
    def test_random_instances(self, n, extra, polar, r, arg, q):
        ctx = EvalContext(q)
        alphas = [a * cmath.exp(1j * t) for a, t in polar[: n + extra]]
        assume(check_nonresonant(alphas, ctx))
        assume(min([abs(a - b) for i, a in enumerate(alphas) for b in alphas[i + 1:]] + [1]) > 0.05)
        Q = -r * cmath.exp(1j * arg)
        assert mbw_check(alphas, n, Q, ctx, target=1e-7).residual < 1e-7


@pytest.fixture(scope="module")
def ctx():
    return EvalContext(0.5)


class TestConnectionMatrix:
    def test_direct_series_decomposes(self, ctx):
        cm = connection_matrix_fuchsian(0.2, ctx)
        for a, b in zip(direct_Xb(0.2, ctx), cm.decompose()):
            assert rel(a, b) < 1e-8

    def test_first_row_is_constant_times_one(self, ctx):
        cm = connection_matrix_fuchsian(0.2, ctx)
        assert all(rel(cm.entries[0][k], cm.constants[k]) < 1e-15 for k in range(4))

    def test_off_axis_point(self, ctx):
        Q = 0.3 * cmath.exp(0.7j)
        cm = connection_matrix_fuchsian(Q, ctx)
        for a, b in zip(direct_Xb(Q, ctx), cm.decompose()):
            assert rel(a, b) < 1e-8

    def test_monodromy_invariance(self, ctx):
        Q = 0.3 + 0.1j
        c0 = birkhoff_coefficients(Q, ctx)
        c1 = birkhoff_coefficients(0.5 * Q, ctx)
        for r0, r1 in zip(c0, c1):
            for a, b in zip(r0, r1):
                assert rel(a, b) < 1e-8


class TestCscSum:
    @pytest.mark.parametrize("alpha,Q,q", [(0.3, 0.3 + 0.2j, 0.5), (0.7, -0.4 + 0.5j, 0.3), (0.45, 1.5 - 2j, 0.6)])
    def test_identity(self, alpha, Q, q):
        lhs, rhs = csc_sum_check(alpha, Q, EvalContext(q))
        assert rel(lhs, rhs) < 1e-10

    def test_cut_rejected(self):
        with pytest.raises(PreconditionError):
            csc_sum_check(0.3, 0.4, EvalContext(0.5))

    def test_shift_covariance(self):
        ctx = EvalContext(0.5)
        Q = 0.3 + 0.4j
        l0, r0 = csc_sum_check(0.3, Q, ctx)
        l1, r1 = csc_sum_check(0.3, 0.5 * Q, ctx)
        assert rel(l1 / l0, r1 / r0) < 1e-10
        assert rel(l1 / l0, 0.5**-0.3) < 1e-10

    def test_central_term_dominates_near_one(self):
        ctx = EvalContext(0.9)
        Q = 0.3 + 0.2j
        full, _ = csc_sum_check(0.3, Q, ctx)
        single, _ = csc_sum_check(0.3, Q, ctx, M=0)
        assert rel(full, single) < 1e-12


class TestPhi43:
    def test_generic(self):
        ctx = EvalContext(0.5)
        rng = np.random.default_rng(3)
        for _ in range(3):
            a = list(0.2 + 0.6 * rng.random(4) + 0.2j * rng.random(4))
            b = list(0.2 + 0.6 * rng.random(3) + 0.2j * rng.random(3))
            z = 0.3 * cmath.exp(1j * rng.uniform(-2.5, 2.5))
            lhs, rhs = phi43_transform_check(a, b, z, ctx)
            assert rel(lhs, rhs) < 1e-8

    def test_swap_symmetry(self):
        ctx = EvalContext(0.5)
        a = [0.3, 0.45, 0.2 + 0.1j, 0.65]
        b = [0.35, 0.55, 0.7 + 0.1j]
        _, r1 = phi43_transform_check(a, b, 0.3 + 0.1j, ctx)
        _, r2 = phi43_transform_check([a[1], a[0], a[2], a[3]], b, 0.3 + 0.1j, ctx)
        assert rel(r1, r2) < 1e-13

    def test_fuchsian_specialisation(self):
        lhs, rhs = fuchsian_phi43_check(0.2, EvalContext(0.5))
        assert rel(lhs, rhs) < 1e-9

    def test_specialisation_matches_general_transformation(self):
        ctx = EvalContext(0.5)
        a = fuchsian_alphas(ctx)
        _, rhs = phi43_transform_check(a, [0.5] * 3, 0.2, ctx)
        assert rel(rhs, fuchsian_phi43_check(0.2, ctx)[1]) < 1e-12

    def test_shifted_fourth_numerator_breaks_agreement(self):
        lhs, rhs = fuchsian_phi43_check(0.2, EvalContext(0.5), literal_numerator=True)
        assert rel(lhs, rhs) > 1e-3
