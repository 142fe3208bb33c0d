r"""Analytic continuation from ``Q = 0`` to ``Q = infinity``.

The central identity (both sides multiplied by ``P^ell(Q)``)::

    sum_d prod_i (P a_i;q)_d / (Pq;q)_d^n Q^d
        = prod_i (P a_i;q) / (Pq;q)^n
          sum_j (q,q,P a_j Q, q/(P a_j Q);q) / (P a_j, q/(P a_j), Q, q/Q;q)
                (q/a_j;q)^n / (prod_{i!=j} (a_i/a_j;q) (q;q)) W~_j(1/Q)

is evaluated on both sides in ``C[e]/(e^n)`` (``P = 1 - e``).  For the
fuchsian case ``n = m = 4``, ``a_i = q^(i/5)`` the right-hand side is
expanded by hand (helper sums ``f_k``, ``g_k``) into a connection matrix.

``W~_j`` is the series part of the solution at infinity, so
``e_{a_j}(1/Q)^-1 W_j(1/Q) = W~_j(1/Q)`` without evaluating any theta function
at ``1/Q``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import EvalContext, NilpotentPoly, binomial_scalar_power
from .errors import (
    DenominatorPochhammerZero,
    PoleAtLattice,
    PoleInSum,
    PreconditionError,
    ResonantAlphas,
    TailTooLarge,
    ValidationError,
)
from .qspecial import qchar, qhyper_value, qlog, qpoch_inf, qpoch_nilpotent, _product_length, _qpowers
from .solver import check_nonresonant, extract_Xb, kgroup_series, w_tilde_value

__all__ = [
    "ConnectionEvaluation",
    "ConnectionMatrix",
    "fuchsian_phi43_check",
    "birkhoff_coefficients",
    "cap_F",
    "cap_G",
    "connection_matrix_fuchsian",
    "csc_sum_check",
    "fuchsian_alphas",
    "helper_sums",
    "log_binomial_factor",
    "mbw_check",
    "mbw_lhs",
    "mbw_rhs",
    "phi43_transform_check",
]


def fuchsian_alphas(ctx: EvalContext) -> list:
    """``[q^(1/5), q^(2/5), q^(3/5), q^(4/5)]``."""
    return [ctx.qpow(Fraction(i, 5)) for i in range(1, 5)]


def log_binomial_factor(ell, n: int, ctx: EvalContext) -> NilpotentPoly:
    """``P^ell = (1 - e)^ell = sum_k (-1)^k C(ell, k) e^k`` mod ``e^n``."""
    return NilpotentPoly(tuple((-1) ** k * binomial_scalar_power(ell, k) * ctx.one for k in range(n)))


def _lattice_guard(Q, ctx: EvalContext):
    """Raise when ``(Q;q)(q/Q;q)`` vanishes, i.e. ``Q`` in ``q^Z``."""
    if Q == 0:
        raise PoleAtLattice("Q = 0")
    k = ctx.log(Q) / ctx.logq
    kr = round(float(k.real))
    if abs(Q - ctx.qpow(kr)) <= 1e3 * ctx.eps * max(1.0, float(abs(Q))):
        raise PoleAtLattice(f"Q = q^{kr} is a pole of the identity")


# --------------------------------------------------------------------------
# both sides of the continuation identity
# --------------------------------------------------------------------------


def mbw_lhs(alphas: Sequence, n: int, Q, N: int | None, ctx: EvalContext, ell=None) -> NilpotentPoly:
    """``P^ell(Q) sum_d c_d Q^d`` for ``|Q| < 1``.

    With ``N=None`` the truncation grows until three consecutive terms fall
    below tolerance.  An explicit ``N`` whose last term is not negligible
    raises :class:`TailTooLarge`.
    """
    Q = ctx.num(Q)
    if float(abs(Q)) >= 1:
        raise PreconditionError("the series side needs |Q| < 1")
    if N is None:
        N = max(20, int(math.ceil(math.log(ctx.tol) / math.log(max(float(abs(Q)), 1e-3)))) + 20)
        grow = True
    else:
        grow = False
    while True:
        ks = kgroup_series(alphas, n, N, ctx)
        total = ks.evaluate(Q, ctx)
        scale = max(float(total.max_abs()), 1e-300)
        last = [float((ks.coeff_series[d] * Q**d).max_abs()) for d in range(N - 2, N + 1)]
        ratio = float(abs(Q))
        tail = max(last) * ratio / (1 - ratio)
        if tail <= 10 * ctx.tol * scale:
            break
        if not grow or N > 20000:
            raise TailTooLarge(f"series tail {tail:.3e} exceeds tolerance at N = {N}")
        N *= 2
    ell = qlog(Q, ctx) if ell is None else ell
    return log_binomial_factor(ell, n, ctx) * total


def mbw_rhs(alphas: Sequence, n: int, Q, N: int | None, ctx: EvalContext, ell=None,
            with_log_factor: bool = True, return_condition: bool = False):
    """Right-hand side of the continuation identity mod ``e^n``.

    Every ``P``-dependent infinite product is expanded in ``e`` (nilpotent
    Pochhammer symbols); ``W~_j(1/Q)`` is the series at infinity, continued
    through its difference equation when ``1/Q`` lies outside its disc.
    ``N`` is accepted for symmetry with :func:`mbw_lhs`; the series at
    infinity are summed to tolerance.  With ``return_condition`` the result
    is ``(value, kappa)`` where ``kappa = max_b sum_j |term_j,b| / |sum_b|``
    measures the cancellation in the sum over ``j``.
    """
    vals = [ctx.num(a) for a in alphas]
    m = len(vals)
    if m < n:
        raise PreconditionError("the continuation identity needs m >= n")
    Q = ctx.num(Q)
    _lattice_guard(Q, ctx)
    if not check_nonresonant(vals, ctx):
        raise ResonantAlphas("two parameters differ by an integer power of q")
    q = ctx.qv
    P = NilpotentPoly.character(n, ctx.one)
    Pinv = P.inv()
    pre = NilpotentPoly.unit(n, ctx.one)
    for a in vals:
        pre = pre * qpoch_nilpotent(P * a, ctx)
    pre = pre / qpoch_nilpotent(P * q, ctx) ** n
    qq = qpoch_inf(q, ctx).value
    base = qq * qq / (qpoch_inf(Q, ctx).value * qpoch_inf(q / Q, ctx).value)
    total = NilpotentPoly.constant(ctx.zero, n)
    mags = [0.0] * n
    for j, aj in enumerate(vals):
        A = (qpoch_nilpotent(P * (aj * Q), ctx) * qpoch_nilpotent(Pinv * (q / (aj * Q)), ctx)
             / (qpoch_nilpotent(P * aj, ctx) * qpoch_nilpotent(Pinv * (q / aj), ctx)))
        C = qpoch_inf(q / aj, ctx).value ** n / qq
        for i, ai in enumerate(vals):
            if i != j:
                C /= qpoch_inf(ai / aj, ctx).value
        W = w_tilde_value(j, vals, n, Q, ctx)
        term = pre * A * (base * C * W)
        total = total + term
        mags = [u + float(abs(v)) for u, v in zip(mags, term)]
    kappa = max(u / max(float(abs(v)), 1e-300) for u, v in zip(mags, total))
    out = total
    if with_log_factor:
        ell = qlog(Q, ctx) if ell is None else ell
        out = log_binomial_factor(ell, n, ctx) * out
    return (out, kappa) if return_condition else out


@dataclass(frozen=True)
class ConnectionEvaluation:
    """Both sides of the continuation identity at one point."""

    Q: complex
    lhs: NilpotentPoly
    rhs: NilpotentPoly
    residual: float
    condition: float = 1.0
    precision: int = 53


def mbw_check(alphas: Sequence, n: int, Q, ctx: EvalContext, N: int | None = None,
              target: float | None = None) -> ConnectionEvaluation:
    """Evaluate both sides; ``residual = max_b |lhs_b - rhs_b| / |lhs_b|``.

    ``condition`` is the cancellation factor of the right-hand side, so the
    attainable residual is roughly ``condition * eps``.  With ``target`` set,
    an evaluation whose ``condition * eps`` exceeds ``target / 100`` is
    repeated with enough extra bits (mpmath backend); the decision uses the
    condition number only.
    """
    ell = qlog(Q, ctx)
    rhs, kappa = mbw_rhs(alphas, n, Q, N, ctx, ell=ell, return_condition=True)
    if target is not None and kappa * ctx.eps > target / 100:
        extra = math.ceil(math.log2(kappa * ctx.eps * 100 / target)) + 8
        hi = EvalContext(ctx.q, precision=ctx.precision + extra, backend="mpmath")
        return mbw_check(alphas, n, Q, hi, N)
    lhs = mbw_lhs(alphas, n, Q, N, ctx, ell=ell)
    res = 0.0
    for a, b in zip(lhs, rhs):
        res = max(res, float(abs(a - b)) / max(float(abs(a)), 1e-300))
    return ConnectionEvaluation(ctx.num(Q), lhs, rhs, res, kappa, ctx.precision)


# --------------------------------------------------------------------------
# expansion helpers
# --------------------------------------------------------------------------


def _elementary(p1, p2, p3):
    """``(e1, e2, e3)`` from power sums."""
    return p1, (p1 * p1 - p2) / 2, (p1**3 - 3 * p1 * p2 + 2 * p3) / 6


def _terms(x, ctx: EvalContext, with_g: bool):
    """Arrays ``u_k = x q^k / (1 - x q^k)`` (f-sums) or ``(a_k, b_k)`` (g-sums)."""
    K = max(_product_length(x, ctx), _product_length(ctx.qv / x, ctx) if with_g else 0, 1) + 1
    qk = _qpowers(ctx, 0, K + 1)
    if ctx.is_native:
        qk = np.asarray(qk, dtype=complex)
        d1 = 1 - x * qk
        if np.min(np.abs(d1)) < 1e3 * ctx.eps:
            raise PoleInSum("1 - x q^k vanishes")
        if not with_g:
            return x * qk / d1
        d2 = 1 - ctx.qv * qk / x
        if np.min(np.abs(d2)) < 1e3 * ctx.eps:
            raise PoleInSum("1 - q^(k+1)/x vanishes")
        den = d1 * d2
        return x * qk * (1 - ctx.qv / x**2) / den, -ctx.qv * qk / x / den
    out_a, out_b = [], []
    for v in qk:
        d1 = 1 - x * v
        if abs(d1) < 1e3 * ctx.eps:
            raise PoleInSum("1 - x q^k vanishes")
        if not with_g:
            out_a.append(x * v / d1)
            continue
        d2 = 1 - ctx.qv * v / x
        if abs(d2) < 1e3 * ctx.eps:
            raise PoleInSum("1 - q^(k+1)/x vanishes")
        out_a.append(x * v * (1 - ctx.qv / x**2) / (d1 * d2))
        out_b.append(-ctx.qv * v / x / (d1 * d2))
    return out_a if not with_g else (out_a, out_b)


def _psum(arr, r, ctx):
    if ctx.is_native:
        return complex(np.sum(np.asarray(arr) ** r))
    return sum((v**r for v in arr), ctx.zero)


def helper_sums(x, ctx: EvalContext, which: str):
    """The sums ``f1, f2, f3`` (first-order expansion of ``(Px;q)``) and ``g1, g2, g3``.

    * ``f_r`` is the ``r``-th elementary symmetric sum of
      ``u_k = x q^k / (1 - x q^k)``;
    * ``g_r`` is the ``e^r`` coefficient of
      ``prod_k (1 + a_k e + b_k e^2 + b_k e^3)`` with
      ``a_k = x q^k (1 - q/x^2) / D_k``, ``b_k = -q^(k+1)/x / D_k``,
      ``D_k = (1 - x q^k)(1 - q^(k+1)/x)``.

    Nested sums are reduced to power sums.
    """
    x = ctx.num(x)
    if which not in ("f1", "f2", "f3", "g1", "g2", "g3"):
        raise ValidationError(f"unknown helper sum {which!r}")
    if which[0] == "f":
        if x == 0:
            return ctx.zero
        u = _terms(x, ctx, False)
        e1, e2, e3 = _elementary(*(_psum(u, r, ctx) for r in (1, 2, 3)))
        return {"f1": e1, "f2": e2, "f3": e3}[which]
    if x == 0:
        raise PoleInSum("g sums have a pole at x = 0")
    a, b = _terms(x, ctx, True)
    e1, e2, e3 = _elementary(*(_psum(a, r, ctx) for r in (1, 2, 3)))
    sb = _psum(b, 1, ctx)
    if which == "g1":
        return e1
    if which == "g2":
        return e2 + sb
    if ctx.is_native:
        sab = complex(np.sum(np.asarray(a) * np.asarray(b)))
    else:
        sab = sum((u * v for u, v in zip(a, b)), ctx.zero)
    return e3 + e1 * sb - sab + sb


def _series3(x, ctx, kind):
    return [helper_sums(x, ctx, f"{kind}{r}") for r in (1, 2, 3)]


def _true_F(xs, ctx):
    """``e^1..e^3`` coefficients of ``prod_x (1 + f1 e + f2 e^2 + f3 e^3)``."""
    fs = [_series3(x, ctx, "f") for x in xs]
    F1 = sum((f[0] for f in fs), ctx.zero)
    F2 = sum((f[1] for f in fs), ctx.zero)
    F3 = sum((f[2] for f in fs), ctx.zero)
    for i in range(len(fs)):
        for j in range(len(fs)):
            if i < j:
                F2 += fs[i][0] * fs[j][0]
            if i != j:
                F3 += fs[i][0] * fs[j][1]
            for k in range(len(fs)):
                if i < j < k:
                    F3 += fs[i][0] * fs[j][0] * fs[k][0]
    return F1, F2, F3


def cap_F(alphas: Sequence, ctx: EvalContext, n: int | None = None) -> list:
    """``[F1, F2, F3]``: ``prod_i (P a_i;q) / (Pq;q)^n = const (1 + F1 e + F2 e^2 + F3 e^3 + ...)``.

    ``n`` defaults to ``len(alphas)``.  The numerator and denominator
    expansions ``N_k``, ``D_k`` are combined as the exact quotient.
    """
    vals = [ctx.num(a) for a in alphas]
    n = len(vals) if n is None else n
    N1, N2, N3 = _true_F(vals, ctx)
    D1, D2, D3 = _true_F([ctx.qv] * n, ctx)
    F1 = N1 - D1
    F2 = N2 - D2 - N1 * D1 + D1 * D1
    F3 = N3 - N2 * D1 + N1 * (D1 * D1 - D2) - D1**3 + 2 * D1 * D2 - D3
    return [F1, F2, F3]


def cap_G(k_over_5, Q, ctx: EvalContext) -> list:
    """``[G1, G2, G3]``: expansion of ``(Px, q/(Px);q) / (Px0, q/(Px0);q)``, ``x0 = q^(k/5)``, ``x = x0 Q``.

    The ratio equals ``theta(-x)/theta(-x0) (1 + G1 e + G2 e^2 + G3 e^3 + ...)``.
    """
    x0 = ctx.qpow(k_over_5)
    x = x0 * ctx.num(Q)
    g1Q, g2Q, g3Q = _series3(x, ctx, "g")
    g1, g2, g3 = _series3(x0, ctx, "g")
    G1 = g1Q - g1
    G2 = -g1Q * g1 + g1 * g1 + g2Q - g2
    G3 = -g1**3 - g1 * g2Q + g1Q * (g1 * g1 - g2) + 2 * g1 * g2 + g3Q - g3
    return [G1, G2, G3]


# --------------------------------------------------------------------------
# the fuchsian connection matrix
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConnectionMatrix:
    """``X_b(Q) = sum_k M[b][k] e_{q^(k/5)}(1/Q)^-1 W_k(1/Q)`` (``k = 1..4`` as columns 0..3)."""

    Q: complex
    entries: tuple
    constants: tuple
    F: tuple
    G: tuple
    w_tilde: tuple = field(default=())

    def decompose(self) -> list:
        """``sum_k M[b][k] W~_k(1/Q)`` for each row ``b``."""
        return [sum(row[k] * self.w_tilde[k] for k in range(4)) for row in self.entries]


def _fuchsian_constant(k: int, Q, ctx: EvalContext):
    """``prod_{i!=k}(q^(i/5)) (q^(1-k/5))^3 (q^(k/5)Q, q^(1-k/5)/Q) / [(q)^3 (Q, q/Q) prod_{i!=k}(q^((i-k)/5))]``."""
    def P(a):
        return qpoch_inf(a, ctx).value

    q = ctx.qv
    num = P(ctx.qpow(Fraction(5 - k, 5))) ** 3 * P(ctx.qpow(Fraction(k, 5)) * Q) * P(ctx.qpow(Fraction(5 - k, 5)) / Q)
    den = P(q) ** 3 * P(Q) * P(q / Q)
    for i in range(1, 5):
        if i != k:
            num *= P(ctx.qpow(Fraction(i, 5)))
            den *= P(ctx.qpow(Fraction(i - k, 5)))
    return num / den


def connection_matrix_fuchsian(Q, ctx: EvalContext, N: int | None = None,
                               with_series: bool = True) -> ConnectionMatrix:
    """Entries ``M[b][k] = const_k(Q) * poly_b(F, G_k)`` with
    ``poly = (1, G1+F1, G2+F2+G1F1, G3+F3+G2F1+G1F2)``.
    """
    Q = ctx.num(Q)
    _lattice_guard(Q, ctx)
    F = cap_F(fuchsian_alphas(ctx), ctx)
    rows = [[None] * 4 for _ in range(4)]
    consts, Gs = [], []
    for k in range(1, 5):
        c = _fuchsian_constant(k, Q, ctx)
        G = cap_G(Fraction(k, 5), Q, ctx)
        polys = [ctx.one, G[0] + F[0], G[1] + F[1] + G[0] * F[0],
                 G[2] + F[2] + G[1] * F[0] + G[0] * F[1]]
        for b in range(4):
            rows[b][k - 1] = c * polys[b]
        consts.append(c)
        Gs.append(tuple(G))
    wt = ()
    if with_series:
        alphas = fuchsian_alphas(ctx)
        wt = tuple(w_tilde_value(k, alphas, 4, Q, ctx) for k in range(4))
    return ConnectionMatrix(Q, tuple(tuple(r) for r in rows), tuple(consts), tuple(F), tuple(Gs), wt)


def birkhoff_coefficients(Q, ctx: EvalContext, cm: ConnectionMatrix | None = None) -> list:
    """``c[m][k] = sum_{a+b=m} (-1)^a C(ell, a) M[b][k] e_{q^(k/5)}(1/Q)^-1``.

    With these, the logarithmic solution ``G_m(Q) = sum_k c[m][k] W_k(1/Q)``;
    each ``c[m][k]`` is invariant under ``Q -> qQ``.
    """
    Q = ctx.num(Q)
    cm = cm or connection_matrix_fuchsian(Q, ctx, with_series=False)
    ell = qlog(Q, ctx)
    out = []
    for m in range(4):
        row = []
        for k in range(4):
            einv = 1 / qchar(ctx.qpow(Fraction(k + 1, 5)), 1 / Q, ctx)
            acc = ctx.zero
            for a in range(m + 1):
                acc += (-1) ** a * binomial_scalar_power(ell, a) * cm.entries[m - a][k]
            row.append(acc * einv)
        out.append(row)
    return out


def direct_Xb(Q, ctx: EvalContext, N: int = 200) -> list:
    """``X_b(Q)`` from the nilpotent series at ``Q = 0`` (``|Q| < 1``)."""
    ks = kgroup_series(fuchsian_alphas(ctx), 4, N, ctx)
    return extract_Xb(ks).values(Q, ctx)


# --------------------------------------------------------------------------
# scalar cross-check identities
# --------------------------------------------------------------------------


def _log_csc(z, mod):
    """``log csc z`` without overflow for large ``|Im z|``."""
    if z.imag < 0:
        e = mod.exp(-2j * z)
        return mod.log(2j) - 1j * z - mod.log(1 - e)
    if z.imag > 0:
        e = mod.exp(2j * z)
        return mod.log(-2j) + 1j * z - mod.log(1 - e)
    return -mod.log(mod.sin(z))


def csc_sum_check(alpha, Q, ctx: EvalContext, M: int = 30):
    """Both sides of the bilateral cosecant sum identity, ``q = exp(-w)`` real.

    ``lhs = sum_{|m|<=M} csc(alpha pi - 2 m pi^2 i / w) exp(2 m pi i log(-Q) / w) (-Q)^-alpha``;
    ``rhs = w (q,q,aQ,q/(aQ);q) / (pi (a,q/a,Q,q/Q;q))`` with ``a = q^alpha``.
    """
    q = ctx.qv
    if complex(q).imag != 0 or not 0 < complex(q).real < 1:
        raise PreconditionError("the cosecant identity needs real 0 < q < 1")
    Q = ctx.num(Q)
    _lattice_guard(Q, ctx)
    L = ctx.log(-Q)
    if abs(float(L.imag)) >= math.pi - 1e-12:
        raise PreconditionError("need |arg(-Q)| < pi")
    w = -ctx.logq
    pi = ctx.pi
    mod = cmath if ctx.is_native else ctx.mp
    alpha = ctx.num(alpha)
    lhs = ctx.zero
    for m in range(-M, M + 1):
        z = alpha * pi - 2j * m * pi * pi / w
        lhs += mod.exp(_log_csc(z, mod) + 2j * m * pi * L / w - alpha * L)
    a = ctx.qpow(alpha)

    def P(x):
        return qpoch_inf(x, ctx).value

    rhs = w * P(q) ** 2 * P(a * Q) * P(q / (a * Q)) / (pi * P(a) * P(q / a) * P(Q) * P(q / Q))
    return lhs, rhs


def phi43_transform_check(a: Sequence, b: Sequence, z, ctx: EvalContext, N: int | None = None):
    """Both sides of the four-term ``4phi3`` transformation.

    ``rhs = sum over a_1 <-> a_k`` of
    ``(a2,a3,a4,b/a1,a1 z,q/(a1 z)) / (b, a_k/a1, z, q/z)`` times
    ``4phi3(a1, a1 q/b; a1 q/a_k; q b1 b2 b3 / (z a1 a2 a3 a4))``.
    Series outside the unit disc are continued through their difference equation.
    """
    if len(a) != 4 or len(b) != 3:
        raise ValidationError("need four numerator and three denominator parameters")
    a = [ctx.num(x) for x in a]
    b = [ctx.num(x) for x in b]
    z = ctx.num(z)
    q = ctx.qv

    def P(x):
        return qpoch_inf(x, ctx).value

    lhs = qhyper_value(a, b, z, ctx)
    zz = q * b[0] * b[1] * b[2] / (z * a[0] * a[1] * a[2] * a[3])
    rhs = ctx.zero
    for k in range(4):
        a1 = a[k]
        others = [a[i] for i in range(4) if i != k]
        num = P(a1 * z) * P(q / (a1 * z))
        den = P(z) * P(q / z)
        for x in others:
            num *= P(x)
            den *= P(x / a1)
        for x in b:
            num *= P(x / a1)
            den *= P(x)
        if den == 0:
            raise DenominatorPochhammerZero("a parameter ratio lies on q^Z")
        inner = qhyper_value([a1] + [a1 * q / x for x in b], [a1 * q / x for x in others], zz, ctx)
        rhs += num / den * inner
    return lhs, rhs


def fuchsian_phi43_check(Q, ctx: EvalContext, literal_numerator: bool = False):
    """The ``4phi3`` transformation specialised to ``a = q^(i/5)``, ``b = (q, q, q)``.

    ``rhs = sum_k c_k (q^(k/5) Q, q^(1-k/5)/Q) / (Q, q/Q) 4phi3(q^(k/5) x4; q^((k-i)/5+1), i != k; q^2/Q)``
    with ``c_k = (q^(i/5), i != k)(q^(1-k/5))^3 / ((q^((i-k)/5), i != k)(q)^3)``.
    ``literal_numerator`` replaces the fourth upper parameter by ``q^((k-1)/5+1)``.
    """
    Q = ctx.num(Q)
    _lattice_guard(Q, ctx)
    q = ctx.qv

    def P(x):
        return qpoch_inf(x, ctx).value

    alphas = fuchsian_alphas(ctx)
    lhs = qhyper_value(alphas, [q, q, q], Q, ctx)
    rhs = ctx.zero
    for k in range(1, 5):
        a1 = ctx.qpow(Fraction(k, 5))
        top = [a1, a1, a1, ctx.qpow(Fraction(k - 1, 5) + 1) if literal_numerator else a1]
        bottom = [ctx.qpow(Fraction(k - i, 5) + 1) for i in range(1, 5) if i != k]
        c = P(ctx.qpow(Fraction(5 - k, 5))) ** 3 / P(q) ** 3
        for i in range(1, 5):
            if i != k:
                c *= P(ctx.qpow(Fraction(i, 5))) / P(ctx.qpow(Fraction(i - k, 5)))
        c *= P(a1 * Q) * P(ctx.qpow(Fraction(5 - k, 5)) / Q) / (P(Q) * P(q / Q))
        rhs += c * qhyper_value(top, bottom, q * q / Q, ctx)
    return lhs, rhs
