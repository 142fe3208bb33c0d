r"""Series solutions of q-difference equations.

* :func:`frobenius_solve` -- ``e_lam(x) sum f_h x^(h/L)`` for a simple,
  non-resonant root ``lam`` of a horizontal characteristic equation;
* :func:`adams_solve` -- solutions attached to a sloped Newton segment, via
  a theta prefactor and the substitution ``z = x^(1/s)``;
* :func:`kgroup_series` -- the series
  ``sum_d prod_i (P a_i;q)_d / (Pq;q)_d^n Q^d`` with coefficients in
  ``C[e]/(e^n)``, ``P = 1 - e``, which encodes the logarithmic solutions at a
  root of multiplicity ``n``;
* :func:`w_solution_explicit` / :func:`w_tilde_value` -- the closed-form
  solutions at infinity of ``[(1-S)^n - Q prod_i (1 - a_i S)] f = 0``.

Examples
--------
>>> from qdeq.algebra import EvalContext
>>> from qdeq.operator import parse_operator
>>> ctx = EvalContext(0.5)
>>> sol = frobenius_solve(parse_operator("1 - 2*S"), 0.5, 5, ctx)
>>> [abs(complex(c)) for c in sol.series.coeffs]
[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra import EvalContext, FracPowerSeries, NilpotentPoly, binomial_scalar_power
from .errors import (
    MultipleRoot,
    PreconditionError,
    RecursionBreakdown,
    ResonantAlphas,
    ResonantRoot,
    ValidationError,
)
from .operator import (
    QDiffOperator,
    QMonomial,
    SolutionObject,
    adams_substitute,
    characteristic_equation,
    conjugate_by_character,
    invert_variable,
    newton_polygon,
)
from .qspecial import continue_downward, qlog

__all__ = [
    "KGroupSeries",
    "QUINTIC",
    "XbDecomposition",
    "adams_root",
    "adams_solve",
    "apply_kgroup",
    "assemble_log_solutions",
    "check_nonresonant",
    "extract_Xb",
    "frobenius_solve",
    "kgroup_series",
    "mbw_operator",
    "quintic_ifunction",
    "quintic_infinity_closed_form",
    "w_solution_explicit",
    "w_tilde_value",
]

QUINTIC = "(1 - S)^5 - Q*(1 - q^1*S^5)*(1 - q^2*S^5)*(1 - q^3*S^5)*(1 - q^4*S^5)*(1 - q^5*S^5)"


# --------------------------------------------------------------------------
# Frobenius recursion
# --------------------------------------------------------------------------


def frobenius_solve(op: QDiffOperator, root, N: int, ctx: EvalContext,
                    resonance_tol: float = 1e-10) -> SolutionObject:
    """Series solution ``e_lam(x) F(x)`` with ``F(0) = 1`` and ``N + 1`` grid coefficients.

    The recursion comes from matching coefficients of the conjugated operator
    on the exponent grid ``j0 + h/L`` (``L`` = lcm of the exponent
    denominators):  ``chi(lam p^h) f_h = -sum (higher terms)``.
    """
    L_op = conjugate_by_character(op, root)
    groups = L_op.grouped(ctx)
    j0 = min(e for _, e in groups)
    L = 1
    for _, e in groups:
        L = math.lcm(L, (e - j0).denominator)
    b = op.shift_base
    lead = [(i, k) for (i, e), k in groups.items() if e == j0]
    higher = [(i, int((e - j0) * L), k) for (i, e), k in groups.items() if e != j0]
    lead_scale = sum(float(abs(k)) for _, k in lead)
    chi0 = sum((k for _, k in lead), ctx.zero)
    if float(abs(chi0)) > 1e-8 * lead_scale:
        raise ValidationError("the given value is not a root of the characteristic equation")
    dchi = sum((i * k for i, k in lead), ctx.zero)
    if float(abs(dchi)) <= 1e-8 * sum(float(abs(i * k)) for i, k in lead):
        raise MultipleRoot("root is not simple; use the nilpotent (K-group) series route")
    step = b / L  # sigma acts on x^(h/L) by q^(b h / L)
    f = [ctx.one]
    for h in range(1, N + 1):
        acc = ctx.zero
        for i, off, k in higher:
            hp = h - off
            if hp >= 0 and f[hp] != 0:
                acc += k * ctx.qpow(step * i * hp) * f[hp]
        den = ctx.zero
        for i, k in lead:
            den += k * ctx.qpow(step * i * h)
        if float(abs(den)) < resonance_tol * lead_scale * max(1.0, float(abs(ctx.qpow(step * h)))):
            raise ResonantRoot(f"recursion denominator vanishes at grid index {h}")
        f.append(-acc / den)
    series = FracPowerSeries(Fraction(0), L, tuple(f))
    return SolutionObject(root, series, Fraction(0), at_infinity=op.variable == "w", variable=op.variable)


# --------------------------------------------------------------------------
# Adams solutions on sloped segments
# --------------------------------------------------------------------------


def adams_root(op_z: QDiffOperator, xi, ctx: EvalContext) -> QMonomial:
    """Root ``xi * c^(1/k)`` of a two-term characteristic polynomial ``c_hi x^hi + c_lo x^lo``.

    The q-power part stays exact; ``xi`` must satisfy ``xi^k = 1``.
    """
    cp = characteristic_equation(op_z)
    if len(cp.terms) != 2 or any(len(v) != 1 for v in cp.terms.values()):
        raise ValidationError("characteristic polynomial is not a two-term binomial")
    lo, hi = sorted(cp.terms)
    (c_lo, g_lo), = cp.terms[lo]
    (c_hi, g_hi), = cp.terms[hi]
    k = hi - lo
    xi_v = ctx.num(xi)
    if float(abs(xi_v**k - 1)) > 1e-10:
        raise ValidationError(f"xi is not a {k}-th root of unity")
    ratio = -ctx.num(c_lo) / ctx.num(c_hi)
    base = ctx.power(ratio, Fraction(1, k)) if ratio != 1 else ctx.one
    return QMonomial(xi_v * base, (g_lo - g_hi) / k)


def adams_solve(op: QDiffOperator, s: int, t: int, xi, N: int, ctx: EvalContext) -> SolutionObject:
    """Solution ``theta_{q^(t/s)}(x^(t/s)) e_{lam}(z) F(z)``, ``z = x^(1/s)``.

    ``F`` is returned re-expressed as a series in ``x`` with denominator
    ``s L``.  The character ``lam`` is the root selected by ``xi``.
    """
    op_z = adams_substitute(op, s, t)
    lam = adams_root(op_z, xi, ctx)
    try:
        red = frobenius_solve(op_z, lam, N, ctx)
    except ResonantRoot as exc:
        raise RecursionBreakdown(str(exc)) from exc
    F = red.series
    series = FracPowerSeries(Fraction(0), F.denom * s, F.coeffs)
    return SolutionObject(lam, series, Fraction(t, s), variable=op.variable)


# --------------------------------------------------------------------------
# closed-form solutions at infinity
# --------------------------------------------------------------------------


def mbw_operator(alphas: Sequence, n: int, variable: str = "Q") -> QDiffOperator:
    """``(1 - S)^n - Q prod_i (1 - a_i S)`` with numeric ``a_i``."""
    one = QDiffOperator.monomial(1, variable=variable)
    S = QDiffOperator.monomial(1, shift=1, variable=variable)
    x = QDiffOperator.monomial(1, x_exp=1, variable=variable)
    prod = one
    for a in alphas:
        prod = prod * (one - S * a)
    return (one - S) ** n - x * prod


def check_nonresonant(alphas: Sequence, ctx: EvalContext, K_max: int = 200, tol: float = 1e-10) -> bool:
    """True iff no ratio ``a_i/a_j`` (i != j) is within ``tol`` of ``q^k``, ``1 <= |k| <= K_max``."""
    vals = [ctx.num(a) for a in alphas]
    for i, ai in enumerate(vals):
        for j, aj in enumerate(vals):
            if i == j:
                continue
            r = ai / aj
            for k in range(1, K_max + 1):
                for qk in (ctx.qpow(k), ctx.qpow(-k)):
                    if float(abs(r - qk)) <= tol * max(float(abs(r)), float(abs(qk))):
                        return False
    return True


def _w_ratios(j: int, alphas: Sequence, n: int, ctx: EvalContext):
    """Yield ``f_(d+1)/f_d`` for the solution at infinity attached to ``a_j``."""
    vals = [ctx.num(a) for a in alphas]
    aj = vals[j]
    rel = [a / aj for a in vals]
    qinv = 1 / ctx.qv
    qk = ctx.one  # q^-d
    d = 0
    while True:
        num_f = 1 - qk / aj
        qk1 = qk * qinv
        r = ctx.one
        for i, ri in enumerate(rel):
            den = 1 - ri * qk1
            if float(abs(den)) < 1e-12 * float(abs(ri * qk1)) + 1e-300:
                raise ResonantAlphas(f"parameters resonate at d = {d + 1}")
            r = r * (num_f / den if i < n else 1 / den)
        for _ in range(len(rel), n):
            r = r * num_f
        yield r
        qk = qk1
        d += 1


def w_solution_explicit(j: int, alphas: Sequence, n: int, N: int, ctx: EvalContext) -> SolutionObject:
    """Solution at infinity ``e_{a_j}(w) W~_j(w)``, ``w = 1/Q``, with ``N + 1`` coefficients.

    ``f_d = prod_{k<d} (1 - q^-k/a_j)^n / prod_i prod_{k=1}^{d} (1 - (a_i/a_j) q^-k)``,
    accumulated as term ratios.
    """
    if len(alphas) < n:
        raise PreconditionError("need m >= n parameters")
    f = [ctx.one]
    gen = _w_ratios(j, alphas, n, ctx)
    for _ in range(N):
        f.append(f[-1] * next(gen))
    return SolutionObject(ctx.num(alphas[j]), FracPowerSeries(Fraction(0), 1, tuple(f)),
                          at_infinity=True, variable="w")


def quintic_infinity_closed_form(l: int, m: int, N: int, ctx: EvalContext) -> list:
    """``prod_{k<d} (1 - xi^-m q^(-k-l/5))^5 / prod_{k<5d} (1 - q^(-k-l))`` for ``d <= N``."""
    xi_m = ctx.root_of_unity(-m, 5)
    out = [ctx.one]
    for d in range(N):
        r = (1 - xi_m * ctx.qpow(Fraction(-5 * d - l, 5))) ** 5
        for k in range(5 * d, 5 * d + 5):
            r = r / (1 - ctx.qpow(-k - l))
        out.append(out[-1] * r)
    return out


def w_tilde_value(j: int, alphas: Sequence, n: int, Q, ctx: EvalContext) -> complex:
    """``W~_j(1/Q)``: the series part of the solution at infinity, at the point ``Q``.

    The series is summed when ``|1/Q|`` is well inside its disc of
    convergence; otherwise it is continued through its q-difference equation.
    """
    w0 = 1 / ctx.num(Q)
    m = len(alphas)
    if m > n:
        radius = math.inf
    else:
        prod = ctx.one
        for a in alphas:
            prod *= ctx.num(a)
        radius = float(abs(prod / ctx.qv**n))

    def direct(w):
        total = ctx.one
        term = ctx.one
        small = 0
        for count, r in enumerate(_w_ratios(j, alphas, n, ctx)):
            term = term * r * w
            total += term
            if float(abs(term)) <= ctx.tol * float(abs(total)):
                small += 1
                if small >= 3:
                    return total
            else:
                small = 0
            if count > 100000:
                break
        raise ValidationError("series at infinity did not converge")

    if radius == math.inf:
        return direct(w0)
    Lj = conjugate_by_character(invert_variable(mbw_operator(alphas, n)), ctx.num(alphas[j]))
    order = Lj.order

    def step(x):
        return [Lj.coeff_value(i, x, ctx) for i in range(order + 1)]

    return continue_downward(step, direct, w0, ctx, radius=radius, order=order)


# --------------------------------------------------------------------------
# nilpotent series at a multiple root
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class KGroupSeries:
    """Coefficients ``c_d`` (``d = 0..N``) in ``C[e]/(e^n)`` of ``sum_d c_d Q^d``."""

    n: int
    alphas: tuple
    coeff_series: tuple

    @property
    def N(self) -> int:
        return len(self.coeff_series) - 1

    def component(self, b: int) -> FracPowerSeries:
        return FracPowerSeries(Fraction(0), 1, tuple(c[b] for c in self.coeff_series))

    def evaluate(self, Q, ctx: EvalContext) -> NilpotentPoly:
        Q = ctx.num(Q)
        total = NilpotentPoly.constant(ctx.zero, self.n)
        Qd = ctx.one
        for c in self.coeff_series:
            total = total + c * Qd
            Qd *= Q
        return total


def _pochhammer_step(a, P: NilpotentPoly):
    return 1 - P * a


def kgroup_series(alphas: Sequence, n: int, N: int, ctx: EvalContext, order: int | None = None) -> KGroupSeries:
    """``c_(d+1) = c_d prod_i (1 - P a_i q^d) / (1 - P q^(d+1))^n``, ``P = 1 - e``."""
    if len(alphas) < n:
        raise PreconditionError("need m >= n parameters")
    order = order or n
    vals = [ctx.num(a) for a in alphas]
    P = NilpotentPoly.character(order, ctx.one)
    c = NilpotentPoly.unit(order, ctx.one)
    out = [c]
    qd = ctx.one
    for _ in range(N):
        num = NilpotentPoly.unit(order, ctx.one)
        for a in vals:
            num = num * (1 - P * (a * qd))
        den = (1 - P * (qd * ctx.qv)) ** n
        c = c * num / den
        out.append(c)
        qd *= ctx.qv
    return KGroupSeries(n, tuple(vals), tuple(out))


def quintic_ifunction(N: int, ctx: EvalContext) -> KGroupSeries:
    """``sum_d prod_{k=1}^{5d} (1 - P^5 q^k) / prod_{k=1}^{d} (1 - P q^k)^5 Q^d`` mod ``e^5``."""
    P = NilpotentPoly.character(5, ctx.one)
    P5 = P**5
    c = NilpotentPoly.unit(5, ctx.one)
    out = [c]
    for d in range(N):
        num = NilpotentPoly.unit(5, ctx.one)
        for k in range(5 * d + 1, 5 * d + 6):
            num = num * (1 - P5 * ctx.qpow(k))
        c = c * num / (1 - P * ctx.qpow(d + 1)) ** 5
        out.append(c)
    alphas = tuple(ctx.root_of_unity(l, 5) * ctx.qpow(Fraction(k, 5)) for l in range(5) for k in range(1, 6))
    return KGroupSeries(5, alphas, tuple(out))


def apply_kgroup(op: QDiffOperator, ks: KGroupSeries, ctx: EvalContext):
    """Residual of ``op`` on ``P^ell(Q) sum_d c_d Q^d`` with ``sigma P^ell = P P^ell``.

    Returns ``(residuals, scales)``: for each computable exponent ``D`` a
    NilpotentPoly residual and the matching componentwise magnitude scale.
    """
    groups = op.grouped(ctx)
    if op.shift_base != 1 or any(e.denominator != 1 for _, e in groups):
        raise ValidationError("nilpotent series route needs integer exponents and shift base 1")
    n = ks.coeff_series[0].order
    P = NilpotentPoly.character(n, ctx.one)
    Ppow = {i: P**i for i, _ in groups}
    e_min = min(int(e) for _, e in groups)
    N = ks.N
    residuals, scales = [], []
    for D in range(e_min, e_min + N + 1):
        r = NilpotentPoly.constant(ctx.zero, n)
        s = [0.0] * n
        for (i, e), k in groups.items():
            h = D - int(e)
            if 0 <= h <= N:
                term = Ppow[i] * ks.coeff_series[h] * (k * ctx.qpow(i * h))
                r = r + term
                for b in range(n):
                    s[b] += float(abs(term[b]))
        residuals.append(r)
        scales.append(s)
    return residuals, scales


@dataclass(frozen=True)
class XbDecomposition:
    """``X_b``: the ``e^b`` components of a :class:`KGroupSeries`."""

    X: tuple

    def values(self, Q, ctx: EvalContext) -> list:
        Q = ctx.num(Q)
        out = []
        for s in self.X:
            total = ctx.zero
            Qd = ctx.one
            for c in s.coeffs:
                total += c * Qd
                Qd *= Q
            out.append(total)
        return out

    def reassemble(self) -> tuple:
        n = len(self.X)
        return tuple(NilpotentPoly(tuple(self.X[b].coeffs[d] for b in range(n)))
                     for d in range(len(self.X[0].coeffs)))


def extract_Xb(ks: KGroupSeries) -> XbDecomposition:
    n = ks.coeff_series[0].order
    return XbDecomposition(tuple(ks.component(b) for b in range(n)))


def assemble_log_solutions(xb: XbDecomposition, Q, ctx: EvalContext, ell=None) -> list:
    """``G_m = sum_{a+b=m} (-1)^a C(ell(Q), a) X_b(Q)``, ``m = 0..n-1``."""
    ell = qlog(Q, ctx) if ell is None else ell
    X = xb.values(Q, ctx)
    out = []
    for m in range(len(X)):
        total = ctx.zero
        for a in range(m + 1):
            total += (-1) ** a * binomial_scalar_power(ell, a) * X[m - a]
        out.append(total)
    return out
