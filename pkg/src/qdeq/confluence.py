r"""The limit ``q -> 1`` and the classical Gamma machinery.

Classical special functions are evaluated in binary64:

* :func:`gamma_classical` -- shifted Stirling series, reflection for
  ``Re z < 0.1``;
* :func:`hurwitz_zeta`, :func:`polygamma`, :func:`zeta` -- partial sums with
  an Euler-Maclaurin tail (shift ``M = 20``);
* :func:`gamma_nilpotent` -- ``Gamma(c + u)`` for nilpotent ``u`` via
  ``log Gamma(c + u) = log Gamma(c) + sum_k psi^(k-1)(c) u^k / k!``.

The q-side objects are followed along ``q(t) = q0^t``.

Examples
--------
>>> abs(gamma_classical(0.5) ** 2 - math.pi) < 1e-13
True
>>> g = gamma_ratio_expansion()
>>> abs(g[2] + 5 * math.pi**2 / 3) < 1e-10
True
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .algebra import EvalContext, NilpotentPoly
from .errors import PoleAtNonpositiveInteger, PreconditionError, SeriesDivergent, ValidationError
from .qspecial import qchar, qgamma, qlog, qpoch_inf, qpoch_nilpotent, theta, theta_nilpotent

__all__ = [
    "ConfluencePath",
    "ConfluenceTrace",
    "GammaSeries",
    "ClassicalContinuationResult",
    "bernoulli",
    "confluence_lhs_trace",
    "euler_gamma",
    "gamma_classical",
    "gamma_nilpotent",
    "gamma_ratio_expansion",
    "hurwitz_zeta",
    "limit_qchar",
    "limit_qlog",
    "log_gamma",
    "polygamma",
    "classical_continuation_check",
    "qgamma_rewrite_check",
    "zeta",
]

_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number ``B_n`` (``B_1 = -1/2``), Akiyama-Tanigawa."""
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    return a[0] if n != 1 else Fraction(-1, 2)


def _is_nonpositive_integer(z) -> bool:
    z = complex(z)
    return z.imag == 0 and z.real <= 0 and z.real == int(z.real)


# --------------------------------------------------------------------------
# classical Gamma
# --------------------------------------------------------------------------


def log_gamma(z) -> complex:
    """``log Gamma(z)`` for ``Re z >= 0.1`` (a branch continuous in ``z``, not the principal log)."""
    z = complex(z)
    shift = 0j
    while z.real < 15:
        shift += cmath.log(z)
        z += 1
    s = (z - 0.5) * cmath.log(z) - z + _HALF_LOG_2PI
    zk = z
    z2 = z * z
    for k in range(1, 12):
        s += float(bernoulli(2 * k)) / (2 * k * (2 * k - 1) * zk)
        zk *= z2
    return s - shift


def gamma_classical(z) -> complex:
    """Euler Gamma function; reflection for ``Re z < 0.1``."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleAtNonpositiveInteger(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.1:
        return math.pi / (cmath.sin(math.pi * z) * gamma_classical(1 - z))
    return cmath.exp(log_gamma(z))


def hurwitz_zeta(s, a, M: int = 20, J: int = 12) -> complex:
    """``zeta(s, a) = sum_k (k + a)^-s`` for ``Re s > 1`` and ``Re a > 0``."""
    s = complex(s)
    a = complex(a)
    if a.real <= 0:
        raise ValidationError("hurwitz_zeta needs Re a > 0")
    total = sum((k + a) ** -s for k in range(M))
    x = a + M
    total += x ** (1 - s) / (s - 1) + 0.5 * x**-s
    rising = s  # s (s+1) ... (s + 2j - 2)
    fact = 2.0
    for j in range(1, J + 1):
        total += float(bernoulli(2 * j)) / fact * rising * x ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    return total


def zeta(s) -> complex:
    return hurwitz_zeta(s, 1)


def _digamma_shifted(c: complex, M: int = 20) -> complex:
    acc = 0j
    while c.real < M:
        acc -= 1 / c
        c += 1
    s = cmath.log(c) - 1 / (2 * c)
    c2 = c * c
    ck = c2
    for j in range(1, 12):
        s -= float(bernoulli(2 * j)) / (2 * j * ck)
        ck *= c2
    return s + acc


def polygamma(k: int, c) -> complex:
    """``psi^(k)(c)``; upward recurrence for small or negative ``Re c``."""
    c = complex(c)
    if _is_nonpositive_integer(c):
        raise PoleAtNonpositiveInteger(f"polygamma has a pole at {c.real:g}")
    if k == 0:
        return _digamma_shifted(c)
    corr = 0j
    sign = (-1) ** k * math.factorial(k)
    while c.real < 1:
        corr -= sign / c ** (k + 1)
        c += 1
    return (-1) ** (k + 1) * math.factorial(k) * hurwitz_zeta(k + 1, c) + corr


def euler_gamma() -> float:
    """Euler's constant as ``-psi(1)``."""
    return -polygamma(0, 1).real


@dataclass(frozen=True)
class GammaSeries:
    """``Gamma(c + u) = sum_k coeffs[k] * (basis element)`` mod ``H^order``.

    ``coeffs`` are the coefficients in the same nilpotent basis as ``u``.
    """

    order: int
    coeffs: tuple

    def to_nilpotent(self) -> NilpotentPoly:
        return NilpotentPoly(self.coeffs)


def gamma_nilpotent(c, u: NilpotentPoly, order: int | None = None) -> GammaSeries:
    """Taylor expansion of Gamma about ``c`` composed with a nilpotent shift ``u``."""
    if u[0] != 0:
        raise ValidationError("the nilpotent shift must have zero constant term")
    n = order or u.order
    g0 = gamma_classical(c)
    logs = [0j] + [polygamma(k - 1, c) / math.factorial(k) for k in range(1, n)]
    expo = NilpotentPoly.constant(0j, n)
    power = NilpotentPoly.unit(n, 1 + 0j)
    uu = NilpotentPoly(tuple(complex(x) for x in u.coeffs[:n]))
    for k in range(1, n):
        power = power * uu
        expo = expo + power * logs[k]
    return GammaSeries(n, tuple((expo.exp() * g0).coeffs))


def gamma_ratio_expansion(order: int = 4) -> list:
    """Coefficients of ``Gamma(H+1)^5 / Gamma(5H+1)`` in powers of ``H``."""
    H = NilpotentPoly.epsilon(order, 1 + 0j)
    num = gamma_nilpotent(1, H).to_nilpotent() ** 5
    den = gamma_nilpotent(1, H * 5).to_nilpotent()
    return list((num / den).coeffs)


# --------------------------------------------------------------------------
# confluence paths
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfluencePath:
    """``q(t) = q0^t`` for decreasing ``t`` in ``(0, 1]``."""

    q0: complex
    t_values: tuple

    def __post_init__(self):
        object.__setattr__(self, "t_values", tuple(float(t) for t in self.t_values))
        if not 0 < abs(self.q0) < 1:
            raise ValidationError("need 0 < |q0| < 1")
        ts = self.t_values
        if any(not 0 < t <= 1 for t in ts) or any(a <= b for a, b in zip(ts, ts[1:])):
            raise ValidationError("t values must be strictly decreasing in (0, 1]")

    @property
    def log_q0(self) -> complex:
        return cmath.log(self.q0)

    def q_of_t(self, t: float) -> complex:
        return cmath.exp(t * self.log_q0)

    def context(self, t: float) -> EvalContext:
        q = self.q_of_t(t)
        return EvalContext(q.real if q.imag == 0 else q)

    def on_spiral(self, Q, tol: float = 1e-12) -> bool:
        """True iff ``Q = q0^s`` for some real ``s``."""
        Q = complex(Q)
        L = self.log_q0
        s = math.log(abs(Q)) / L.real
        d = (cmath.phase(Q) - s * L.imag) / (2 * math.pi)
        return abs(d - round(d)) < tol


@dataclass(frozen=True)
class ConfluenceTrace:
    """Values along a path, their target, and the deviations."""

    t_values: tuple
    values: tuple
    target: complex
    deviations: tuple

    @property
    def monotone(self) -> bool:
        d = self.deviations
        return all(b < a for a, b in zip(d, d[1:]))

    @property
    def final_deviation(self) -> float:
        return self.deviations[-1]


def _argument(Q, sign: int):
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    return sign * complex(Q)


def limit_qlog(Q, path: ConfluencePath, sign: int = -1, target=None) -> ConfluenceTrace:
    """``(q(t) - 1) ell_{q(t)}(sign * Q)`` along the path, compared with ``log Q``.

    ``sign = -1`` evaluates at ``-Q``; ``sign = +1`` at ``Q``.  The product
    form of the log-derivative is used (the bilateral sum cancels badly as
    ``q -> 1``).
    """
    x = _argument(Q, sign)
    if path.on_spiral(-x):
        raise PreconditionError("the argument lies on the excluded spiral")
    target = cmath.log(complex(Q)) if target is None else target
    vals = []
    for t in path.t_values:
        ctx = path.context(t)
        vals.append(complex((ctx.qv - 1) * qlog(x, ctx, method="product")))
    devs = tuple(abs(v - target) for v in vals)
    return ConfluenceTrace(path.t_values, tuple(vals), target, devs)


def limit_qchar(Q, mu, path: ConfluencePath, sign: int = -1, target=None) -> ConfluenceTrace:
    """``e_{q(t), lam(t)}(sign * Q)`` with ``lam = 1 + (q - 1) mu``, compared with ``Q^mu``."""
    x = _argument(Q, sign)
    if path.on_spiral(-x):
        raise PreconditionError("the argument lies on the excluded spiral")
    mu = complex(mu)
    target = complex(Q) ** mu if target is None else target
    vals = []
    for t in path.t_values:
        ctx = path.context(t)
        lam = 1 + (ctx.qv - 1) * mu
        vals.append(complex(qchar(lam, x, ctx, method="product")))
    devs = tuple(abs(v - target) for v in vals)
    return ConfluenceTrace(path.t_values, tuple(vals), target, devs)


# --------------------------------------------------------------------------
# the classical continuation identity, expanded in H
# --------------------------------------------------------------------------


def _euler_average(partials: list, rounds: int):
    """Repeated averaging of consecutive partial sums."""
    s = list(partials)
    for _ in range(rounds):
        if len(s) < 2:
            break
        s = [(a + b) * 0.5 for a, b in zip(s, s[1:])]
    return s[-1]


def _accelerated_sum(terms: list, rounds: int):
    partials = []
    acc = terms[0] * 0
    for t in terms:
        acc = acc + t
        partials.append(acc)
    return _euler_average(partials, rounds)


def _lhs62_terms(Q: complex, N: int, n: int) -> list:
    H = NilpotentPoly.epsilon(n, 1 + 0j)
    term = NilpotentPoly.unit(n, 1 + 0j)
    out = [term]
    z = Q / 5**5
    for d in range(N):
        num = NilpotentPoly.unit(n, 1 + 0j)
        for k in range(5 * d + 1, 5 * d + 6):
            num = num * (H * 5 + k)
        term = term * num / (H + (d + 1)) ** 5 * z
        out.append(term)
    return out


def _wtilde62_terms(k: int, Q: complex, N: int) -> list:
    term = 1 + 0j
    out = [term]
    z = 5**5 / Q
    for d in range(N):
        r = (k / 5 + d) ** 5
        for l in range(5 * d, 5 * d + 5):
            r /= k + l
        term = term * r * z
        out.append(term)
    return out


def _classical_continuation_constant(k: int) -> complex:
    c = 5 ** (k - 1) * math.factorial(4 - k)
    for i in range(1, 5):
        if i != k:
            c /= i - k
    return c / gamma_classical(1 - k / 5) ** 5


@dataclass(frozen=True)
class ClassicalContinuationResult:
    """Both sides of the classical identity in ``C[H]/(H^order)``."""

    Q: complex
    lhs: NilpotentPoly
    rhs: NilpotentPoly
    phase: str
    strategy: str

    def __iter__(self):
        return iter((self.lhs, self.rhs))

    @property
    def deviation(self) -> float:
        return max(abs(a - b) / max(abs(a), 1e-300) for a, b in zip(self.lhs, self.rhs))


def classical_continuation_check(Q=-1, H_order: int = 4, N: int = 80, phase: str = "corrected", rounds: int | None = None) -> ClassicalContinuationResult:
    r"""``Q^H sum_d prod_{k<=5d}(5H+k)/prod_{k<=d}(H+k)^5 (Q/5^5)^d`` against
    ``5^(5H) Gamma(H+1)^5/Gamma(5H+1) sum_k C_k pi/sin(pi(H+k/5)) phase_k W~_k(1/Q)``.

    The left series converges for ``|Q| <= 1`` and the ``W~_k`` for
    ``|Q| >= 1``, so both sides are only comparable on ``|Q| = 1``; there the
    partial sums are accelerated by repeated averaging.  ``phase`` is
    ``Q^H (-Q)^(-H-k/5)`` (``"corrected"``) or ``exp(-pi i (H + k/5))``
    (``"literal"``).
    """
    Q = complex(Q)
    if abs(abs(Q) - 1) > 1e-12:
        raise SeriesDivergent("both sides converge simultaneously only on |Q| = 1")
    if phase not in ("corrected", "literal"):
        raise ValidationError("phase must be 'corrected' or 'literal'")
    n = H_order
    rounds = N // 2 if rounds is None else rounds
    H = NilpotentPoly.epsilon(n, 1 + 0j)
    logQ = cmath.log(Q)
    QH = (H * logQ).exp()
    lhs = QH * _accelerated_sum(_lhs62_terms(Q, N, n), rounds)
    pref = (H * (5 * math.log(5))).exp() * NilpotentPoly(gamma_ratio_expansion(n))
    logmQ = cmath.log(-Q)
    total = NilpotentPoly.constant(0j, n)
    for k in range(1, 5):
        a = k / 5
        # pi / sin(pi (H + a)) = Gamma(H + a) Gamma(1 - a - H)
        refl = gamma_nilpotent(a, H).to_nilpotent() * gamma_nilpotent(1 - a, -H).to_nilpotent()
        if phase == "corrected":
            ph = (H * logQ - (H + a) * logmQ).exp()
        else:
            ph = ((H + a) * (-1j * math.pi)).exp()
        W = _accelerated_sum(_wtilde62_terms(k, Q, N), rounds)
        total = total + refl * ph * (_classical_continuation_constant(k) * W)
    return ClassicalContinuationResult(Q, lhs, pref * total, phase, "unit circle, averaged partial sums")


# --------------------------------------------------------------------------
# q-Gamma form of the fuchsian continuation
# --------------------------------------------------------------------------


def _qgamma_nilpotent(c, Hn: NilpotentPoly, ctx: EvalContext) -> NilpotentPoly:
    """``Gamma_q(H + c)`` with ``q^H = P``: ``(q;q)/(P q^c;q) (1-q)^(1-c-H)``."""
    P = (Hn * ctx.logq).exp()
    c = ctx.num(c)
    den = qpoch_nilpotent(P * ctx.qpow(c), ctx)
    pw = (Hn * (-ctx.log(1 - ctx.qv))).exp() * ctx.exp((1 - c) * ctx.log(1 - ctx.qv))
    return pw * qpoch_inf(ctx.qv, ctx).value / den


def qgamma_rewrite_check(Q, ctx: EvalContext, n: int = 4):
    """The q-Gamma rewriting of the fuchsian continuation against the direct right-hand side.

    Returns ``(rewritten, direct)``, both in ``C[e]/(e^n)`` with ``P = 1 - e``
    and the common factor ``P^ell`` included.  ``H = log(P)/log(q)``.
    """
    from .connection import fuchsian_alphas, log_binomial_factor, mbw_rhs
    from .solver import w_tilde_value

    Q = ctx.num(Q)
    ell = qlog(Q, ctx)
    eps = NilpotentPoly.epsilon(n, ctx.one)
    Hn = (1 - eps).log() / ctx.logq
    one = NilpotentPoly.unit(n, ctx.one)
    pref = one
    for _ in range(4):
        pref = pref * _qgamma_nilpotent(1, Hn, ctx)
    for i in range(1, 5):
        pref = pref / _qgamma_nilpotent(Fraction(i, 5), Hn, ctx)
    th_den = theta(-Q, ctx).value
    alphas = fuchsian_alphas(ctx)
    total = NilpotentPoly.constant(ctx.zero, n)
    for k in range(1, 5):
        c = ctx.one
        for i in range(1, 5):
            if i != k:
                c *= qgamma(Fraction(i - k, 5), ctx)
        c /= qgamma(1 - Fraction(k, 5), ctx) ** 4
        g = _qgamma_nilpotent(Fraction(k, 5), Hn, ctx) * _qgamma_nilpotent(1 - Fraction(k, 5), -Hn, ctx)
        P = (Hn * ctx.logq).exp()
        th = theta_nilpotent(P * (-ctx.qpow(Fraction(k, 5)) * Q), ctx) / th_den
        W = w_tilde_value(k - 1, alphas, 4, Q, ctx)
        total = total + g * th * (c * W)
    rewritten = log_binomial_factor(ell, n, ctx) * pref * total
    direct = mbw_rhs(alphas, 4, Q, None, ctx, ell=ell)
    return rewritten, direct


# --------------------------------------------------------------------------
# the series side along q(t) = exp(-t)
# --------------------------------------------------------------------------


def _one_minus_exp(c: float, t: float, n: int) -> NilpotentPoly:
    """``1 - exp(-t (H + c))`` in ``C[H]/(H^n)``, constant term via expm1."""
    e = math.exp(-t * c)
    coeffs = [-math.expm1(-t * c)]
    tk = 1.0
    for k in range(1, n):
        tk *= t
        coeffs.append(-e * (-1) ** k * tk / math.factorial(k))
    return NilpotentPoly(tuple(complex(x) for x in coeffs))


def confluence_lhs_trace(Q, t_values: Sequence = (1e-1, 1e-2, 1e-3), n: int = 4, N: int | None = None):
    """q-side ``P^ell(Q) sum_d prod_i (P q^(i/5);q)_d/(Pq;q)_d^4 Q^d`` with ``P = exp(-tH)``
    against ``Q^H sum_d prod_i (H+i/5)_d/(H+1)_d^4 Q^d``.

    Returns ``(classical, [(t, q_side, deviation), ...])``.
    """
    Q = complex(Q)
    if abs(Q) >= 1:
        raise PreconditionError("need |Q| < 1")
    N = N or int(math.ceil(math.log(1e-18) / math.log(abs(Q)))) + 10
    H = NilpotentPoly.epsilon(n, 1 + 0j)
    term = NilpotentPoly.unit(n, 1 + 0j)
    cl = term
    for d in range(N):
        r = NilpotentPoly.unit(n, 1 + 0j)
        for i in range(1, 5):
            r = r * (H + (i / 5 + d))
        term = term * r / (H + (d + 1)) ** 4 * Q
        cl = cl + term
    classical = (H * cmath.log(Q)).exp() * cl
    rows = []
    for t in t_values:
        ctx = EvalContext(math.exp(-t))
        term = NilpotentPoly.unit(n, 1 + 0j)
        s = term
        for d in range(N):
            r = NilpotentPoly.unit(n, 1 + 0j)
            for i in range(1, 5):
                r = r * _one_minus_exp(i / 5 + d, t, n)
            term = term * r / _one_minus_exp(d + 1, t, n) ** 4 * Q
            s = s + term
        ell = complex(qlog(Q, ctx, method="product"))
        qside = (H * (-t * ell)).exp() * s
        dev = max(abs(a - b) / max(abs(b), 1e-300) for a, b in zip(qside, classical))
        rows.append((t, qside, dev))
    return classical, rows
