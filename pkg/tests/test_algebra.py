import cmath
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from qdeq.algebra import EvalContext, FracPowerSeries, NilpotentPoly, binomial_scalar_power
from qdeq.errors import NonInvertible, ValidationError

small = st.floats(-2, 2, allow_nan=False)
cplx = st.builds(complex, small, small)


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


class TestEvalContext:
    def test_native_default(self):
        ctx = EvalContext(0.5)
        assert ctx.is_native and ctx.tol == 2.0**-53

    def test_rational_q_is_exact_before_conversion(self):
        ctx = EvalContext(Fraction(1, 3))
        assert close(ctx.qv, 1 / 3)

    @pytest.mark.parametrize("q", [0, 1, 1.5, -2])
    def test_rejects_q_outside_disc(self, q):
        with pytest.raises(ValidationError):
            EvalContext(q)

    def test_native_limited_to_binary64(self):
        with pytest.raises(ValidationError):
            EvalContext(0.5, precision=80, backend="native")

    def test_qpow_matches_power(self):
        ctx = EvalContext(0.3 + 0.2j)
        assert close(ctx.qpow(3), (0.3 + 0.2j) ** 3)

    def test_mpmath_backend_precision(self):
        ctx = EvalContext(Fraction(1, 2), precision=120)
        assert not ctx.is_native
        with mpmath.workprec(200):
            ref = mpmath.mpf(2) ** (-mpmath.mpf(1) / 5)
            assert abs(ctx.qpow(Fraction(1, 5)) - ref) < mpmath.mpf(2) ** -110

    def test_root_of_unity(self):
        ctx = EvalContext(0.5)
        assert close(ctx.root_of_unity(1, 5) ** 5, 1)
        assert close(ctx.root_of_unity(7, 5), cmath.exp(2j * math.pi * 2 / 5))


class TestFracPowerSeries:
    def test_product_truncates(self):
        a = FracPowerSeries.from_coeffs([1, 1], trunc_order=4)
        b = FracPowerSeries.from_coeffs([1, -1], trunc_order=4)
        assert (a * b).coeffs == (1, 0, -1, 0, 0)

    def test_fractional_grid_alignment(self):
        a = FracPowerSeries(Fraction(0), 2, (1, 1, 0, 0, 0))
        b = FracPowerSeries(Fraction(0), 3, (1, 0, 1, 0, 0, 0, 0))
        c = a + b
        assert c.denom == 6
        assert c.coefficient(Fraction(1, 2)) == 1 and c.coefficient(Fraction(2, 3)) == 1

    def test_sigma_scales_by_q_power(self):
        ctx = EvalContext(0.5)
        a = FracPowerSeries(Fraction(1, 2), 2, (1, 1, 1))
        s = a.sigma(ctx)
        for k, c in enumerate(s.coeffs):
            assert close(c, 0.5 ** (0.5 + k / 2))

    @given(st.lists(cplx, min_size=3, max_size=6), st.lists(cplx, min_size=3, max_size=6),
           st.lists(cplx, min_size=3, max_size=6))
    def test_ring_laws(self, x, y, z):
        n = min(len(x), len(y), len(z)) - 1
        a, b, c = (FracPowerSeries.from_coeffs(v[: n + 1]) for v in (x, y, z))
        lhs = (a * b) * c
        rhs = a * (b * c)
        for u, v in zip(lhs.coeffs, rhs.coeffs):
            assert close(u, v, 1e-10)
        for u, v in zip((a * (b + c)).coeffs, (a * b + a * c).coeffs):
            assert close(u, v, 1e-10)

    def test_evaluate(self):
        ctx = EvalContext(0.5)
        a = FracPowerSeries.from_coeffs([1, 2, 3])
        assert close(a.evaluate(0.5, ctx), 1 + 1 + 0.75)


class TestNilpotent:
    def test_inverse_geometric(self):
        x = NilpotentPoly((2, 1, 0))
        assert x.inv().coeffs == (0.5, -0.25, 0.125)

    def test_noninvertible(self):
        with pytest.raises(NonInvertible):
            NilpotentPoly((0, 1)).inv()

    @given(st.lists(cplx, min_size=4, max_size=4))
    def test_exp_log_roundtrip(self, c):
        x = NilpotentPoly(tuple([0j] + c[1:]))
        y = x.exp().log()
        assert all(close(a, b, 1e-10) for a, b in zip(x, y))

    @given(cplx.filter(lambda z: abs(z) > 0.1), st.lists(cplx, min_size=3, max_size=3))
    def test_inverse_is_inverse(self, a0, rest):
        x = NilpotentPoly((a0, *rest))
        e = x * x.inv()
        assert close(e[0], 1, 1e-9) and all(abs(v) < 1e-8 * max(1, x.max_abs() / abs(a0)) ** 4 for v in e.coeffs[1:])

    def test_character_power_binomial(self):
        # P = 1 - e, P^x = sum (-1)^k C(x, k) e^k
        P = NilpotentPoly.character(4, 1.0)
        x = 0.37
        Px = P.power(x)
        for k in range(4):
            assert close(Px[k], (-1) ** k * binomial_scalar_power(x, k))

    def test_exp_full_precision_under_mpmath(self):
        ctx = EvalContext(0.5, precision=200)
        one = ctx.one
        u = NilpotentPoly((ctx.num(1) / 3, one, one / 7, one / 11))
        got = u.exp()
        mp = ctx.mp
        ref = mp.taylor(lambda e: mp.exp(one / 3 + e + e**2 / 7 + e**3 / 11), 0, 3)
        for a, b in zip(got, ref):
            assert abs(a - b) < mp.mpf(2) ** -190
