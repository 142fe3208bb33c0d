r"""q-special functions.

Conventions, for ``0 < |q| < 1``:

* ``(a;q)_d = (1-a)(1-aq)...(1-aq^(d-1))`` and ``(a;q)_inf`` its limit;
* ``theta(Q) = sum_{d in Z} q^(d(d-1)/2) Q^d = (q;q)(-Q;q)(-q/Q;q)``, so that
  ``theta(qQ) = theta(Q)/Q`` and the zeros are ``-q^Z``;
* ``ell(Q) = -Q theta'(Q)/theta(Q)`` with ``ell(qQ) = ell(Q) + 1``;
* ``e_lam(Q) = theta(Q)/theta(lam Q)`` with ``e_lam(qQ) = lam e_lam(Q)``;
* ``Gamma_q(x) = (q;q)/(q^x;q) (1-q)^(1-x)``;
* ``phi(a; b; z)`` is the basic hypergeometric series with the usual
  balancing factor ``((-1)^d q^(d(d-1)/2))^(1+s-r)``, which is trivial for
  ``r = s + 1``.

Every function takes an :class:`~qdeq.algebra.EvalContext`.  Powers with
non-integer exponents use the principal branch.

Examples
--------
>>> from qdeq.algebra import EvalContext
>>> ctx = EvalContext(0.5)
>>> round(qpoch(ctx.qv, ctx, 2).real, 12)
0.375
>>> abs(theta(-1, ctx).value) < 1e-15
True
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import EvalContext, NilpotentPoly
from .errors import (
    DenominatorPochhammerZero,
    NonConvergence,
    NumericalError,
    PoleAtNonpositive,
    PoleAtThetaZero,
    ValidationError,
)

__all__ = [
    "ProductValue",
    "SeriesValue",
    "ThetaValue",
    "continue_downward",
    "log_qpoch_inf",
    "qchar",
    "qgamma",
    "qhyper",
    "qhyper_value",
    "qlog",
    "qpoch",
    "qpoch_inf",
    "qpoch_nilpotent",
    "theta",
    "theta_log_derivative",
    "theta_nilpotent",
]

ITERATION_CAP = 10**6


@dataclass(frozen=True)
class ThetaValue:
    """Theta value with the number of terms (or factors) used and an error estimate."""

    value: complex
    terms_used: int
    est_error: float


@dataclass(frozen=True)
class ProductValue:
    """Truncated infinite product; ``tail_bound`` bounds the relative truncation error."""

    value: complex
    terms_used: int
    tail_bound: float


@dataclass(frozen=True)
class SeriesValue:
    """Partial sum; ``last_term`` is the magnitude of the last term added."""

    value: complex
    last_term: float
    terms_used: int


# --------------------------------------------------------------------------
# Pochhammer symbols
# --------------------------------------------------------------------------


def _product_length(a, ctx: EvalContext, margin: float = 1e-2) -> int:
    """Smallest K with |a q^K| < tol * margin."""
    aa = abs(a)
    if aa == 0:
        return 0
    aq = abs(ctx.qv)
    target = ctx.tol * margin
    if aa < target:
        return 0
    k = math.ceil(math.log(target / float(aa)) / math.log(float(aq)))
    if k > 50 * ITERATION_CAP:
        raise NonConvergence("infinite product needs too many factors")
    return max(k, 0)


def _qpowers(ctx: EvalContext, start: int, stop: int):
    """``q**k`` for ``start <= k < stop`` (numpy array in native mode)."""
    if ctx.is_native:
        ks = np.arange(start, stop, dtype=float)
        return np.exp(ks * ctx.logq)
    return [ctx.qpow(k) for k in range(start, stop)]


def qpoch_inf(a, ctx: EvalContext) -> ProductValue:
    """``(a;q)_inf`` by plain truncation, with a bound on the neglected tail."""
    a = ctx.num(a)
    K = _product_length(a, ctx)
    if K == 0:
        return ProductValue(ctx.one - a if a != 0 else ctx.one, 1 if a != 0 else 0, float(abs(a)))
    qk = _qpowers(ctx, 0, K + 1)
    if ctx.is_native:
        value = complex(np.prod(1.0 - a * qk))
    else:
        value = ctx.one
        for x in qk:
            value *= 1 - a * x
    tail = float(abs(a * ctx.qpow(K + 1))) / (1 - float(abs(ctx.qv)))
    return ProductValue(value, K + 1, tail)


def qpoch(a, ctx: EvalContext, d=math.inf):
    """``(a;q)_d`` for a nonnegative integer ``d`` or ``d = inf``."""
    if d == math.inf:
        return qpoch_inf(a, ctx).value
    if d < 0 or int(d) != d:
        raise ValidationError("d must be a nonnegative integer or inf")
    a = ctx.num(a)
    value = ctx.one
    qk = ctx.one
    q = ctx.qv
    for _ in range(int(d)):
        value *= 1 - a * qk
        qk *= q
    return value


def log_qpoch_inf(a, ctx: EvalContext):
    """Sum of principal logarithms of the factors of ``(a;q)_inf``.

    ``exp`` of the result is ``(a;q)_inf``; useful when the product itself
    under- or overflows (``q`` close to 1).  Returns ``None`` if a factor
    vanishes.
    """
    a = ctx.num(a)
    K = _product_length(a, ctx)
    if K == 0:
        return ctx.log(1 - a) if a != 0 else ctx.zero
    qk = _qpowers(ctx, 0, K + 1)
    if ctx.is_native:
        f = 1.0 - a * qk
        if np.any(np.abs(f) < 4 * ctx.eps):
            return None
        return complex(np.sum(np.log(f)))
    total = ctx.zero
    for x in qk:
        f = 1 - a * x
        if abs(f) < 4 * ctx.eps:
            return None
        total += ctx.log(f)
    return total


def qpoch_nilpotent(a: NilpotentPoly, ctx: EvalContext) -> NilpotentPoly:
    r"""``(a;q)_inf`` for a nilpotent-shifted argument ``a = a_0 + delta``.

    Uses ``(a;q) = (a_0;q) exp(-sum_r s_r delta^r / r)`` with the power sums
    ``s_r = sum_k (q^k / (1 - a_0 q^k))^r``.
    """
    n = a.order
    a0 = ctx.num(a[0])
    base = qpoch_inf(a0, ctx).value
    if n == 1:
        return NilpotentPoly((base,))
    delta = a.nilpotent_part()
    K = max(_product_length(ctx.one, ctx), 1)
    qk = _qpowers(ctx, 0, K + 1)
    if ctx.is_native:
        den = 1.0 - a0 * qk
        if np.any(np.abs(den) < 4 * ctx.eps):
            # (a_0;q) vanishes: expand the vanishing factor separately
            return _qpoch_nilpotent_direct(a, ctx)
        u = qk / den
        sums = [complex(np.sum(u**r)) for r in range(1, n)]
    else:
        us = []
        for x in qk:
            den = 1 - a0 * x
            if abs(den) < 4 * ctx.eps:
                return _qpoch_nilpotent_direct(a, ctx)
            us.append(x / den)
        sums = [sum((u**r for u in us), ctx.zero) for r in range(1, n)]
    log_part = NilpotentPoly.constant(ctx.zero, n)
    power = NilpotentPoly.unit(n, ctx.one)
    for r in range(1, n):
        power = power * delta
        log_part = log_part - power * (sums[r - 1] / r)
    return log_part.exp() * base


def _qpoch_nilpotent_direct(a: NilpotentPoly, ctx: EvalContext) -> NilpotentPoly:
    """Factor-by-factor product; fallback when a factor is not invertible."""
    K = max(_product_length(a[0], ctx), 1)
    out = NilpotentPoly.unit(a.order, ctx.one)
    qk = ctx.one
    for _ in range(K + 1):
        out = out * (1 - a * qk)
        qk *= ctx.qv
    return out


def qpoch_nilpotent_finite(a: NilpotentPoly, d: int, ctx: EvalContext) -> NilpotentPoly:
    """``(a;q)_d`` for a nilpotent-shifted argument."""
    out = NilpotentPoly.unit(a.order, ctx.one)
    qk = ctx.one
    for _ in range(d):
        out = out * (1 - a * qk)
        qk *= ctx.qv
    return out


# --------------------------------------------------------------------------
# theta and friends
# --------------------------------------------------------------------------


def _theta_sum(Q, ctx: EvalContext, derivative: bool = False):
    """Bilateral sum; returns (theta, Q theta', terms, est_error, max term)."""
    q = ctx.qv
    tol = ctx.tol
    S = ctx.one
    D = ctx.zero
    big = 1.0
    terms = 1
    tails = []
    # d >= 0: t_{d+1} = t_d q^d Q
    # d < 0:  t_{-k-1} = t_{-k} q^(k+1) / Q
    for sign in (1, -1):
        t = ctx.one
        qd = ctx.one if sign == 1 else q
        d = 0
        while True:
            ratio = qd * Q if sign == 1 else qd / Q
            t = t * ratio
            d += sign
            S += t
            if derivative:
                D += d * t
            terms += 1
            at = abs(t)
            big = max(big, float(at))
            qd *= q
            decreasing = abs(qd * Q if sign == 1 else qd / Q) < 1
            if decreasing and (at <= tol * abs(S) or at <= tol * ctx.eps * big):
                tails.append(float(at))
                break
            if terms > ITERATION_CAP:
                raise NonConvergence("theta series did not converge")
    est = sum(tails) + 4 * ctx.eps * big
    return S, D, terms, est, big


def _check_nonzero(Q):
    if Q == 0:
        raise ValidationError("theta is evaluated at Q = 0")


def theta(Q, ctx: EvalContext, method: str = "sum") -> ThetaValue:
    """Jacobi theta ``sum_d q^(d(d-1)/2) Q^d``.

    ``method="sum"`` sums the bilateral series; ``method="product"`` uses the
    triple product ``(q;q)(-Q;q)(-q/Q;q)`` (stable as ``q -> 1``).
    """
    Q = ctx.num(Q)
    _check_nonzero(Q)
    if method == "sum":
        S, _, terms, est, _ = _theta_sum(Q, ctx)
        return ThetaValue(S, terms, est)
    if method == "product":
        parts = [qpoch_inf(ctx.qv, ctx), qpoch_inf(-Q, ctx), qpoch_inf(-ctx.qv / Q, ctx)]
        value = parts[0].value * parts[1].value * parts[2].value
        terms = sum(p.terms_used for p in parts)
        est = float(abs(value)) * (sum(p.tail_bound for p in parts) + terms * ctx.eps)
        return ThetaValue(value, terms, est)
    raise ValidationError(f"unknown theta method {method!r}")


def theta_nilpotent(x: NilpotentPoly, ctx: EvalContext) -> NilpotentPoly:
    """Theta at a nilpotent-shifted argument, via the triple product."""
    return (qpoch_nilpotent(-x, ctx) * qpoch_nilpotent(-ctx.qv / x, ctx)) * qpoch_inf(ctx.qv, ctx).value


def _factor_arrays(x, ctx: EvalContext):
    """Arrays ``x q^k`` (k >= 0) and ``q^k / x`` (k >= 1) up to truncation."""
    K1 = _product_length(x, ctx)
    K2 = _product_length(ctx.qv / x, ctx)
    a = _qpowers(ctx, 0, K1 + 1)
    b = _qpowers(ctx, 1, K2 + 2)
    if ctx.is_native:
        return x * a, b / x
    return [x * v for v in a], [v / x for v in b]


def _pole_guard(values, ctx: EvalContext):
    m = np.min(np.abs(values)) if ctx.is_native else min(abs(v) for v in values)
    if m < 1e3 * ctx.eps:
        raise PoleAtThetaZero("argument lies on -q^Z")


def theta_log_derivative(Q, ctx: EvalContext, method: str = "sum"):
    """``Q theta'(Q) / theta(Q)``.

    The sum method differentiates the bilateral series termwise; the product
    method sums ``log`` derivatives of the triple-product factors.
    """
    Q = ctx.num(Q)
    _check_nonzero(Q)
    if method == "sum":
        S, D, _, _, big = _theta_sum(Q, ctx, derivative=True)
        if abs(S) <= 1e3 * ctx.eps * big:
            raise PoleAtThetaZero("theta vanishes at this point")
        return D / S
    if method == "product":
        u, v = _factor_arrays(Q, ctx)
        if ctx.is_native:
            _pole_guard(1 + u, ctx)
            _pole_guard(1 + v, ctx)
            return complex(np.sum(u / (1 + u)) - np.sum(v / (1 + v)))
        _pole_guard([1 + x for x in u], ctx)
        _pole_guard([1 + x for x in v], ctx)
        return sum((x / (1 + x) for x in u), ctx.zero) - sum((x / (1 + x) for x in v), ctx.zero)
    raise ValidationError(f"unknown theta method {method!r}")


def qlog(Q, ctx: EvalContext, method: str = "sum"):
    """q-logarithm ``ell(Q) = -Q theta'(Q)/theta(Q)``."""
    return -theta_log_derivative(Q, ctx, method)


def qchar(lam, Q, ctx: EvalContext, method: str = "sum"):
    """q-character ``e_lam(Q) = theta(Q)/theta(lam Q)``."""
    lam = ctx.num(lam)
    Q = ctx.num(Q)
    if lam == 0:
        raise ValidationError("lambda must be nonzero")
    if lam == 1:
        return ctx.one
    if method == "sum":
        S1, _, _, _, b1 = _theta_sum(Q, ctx)
        S2, _, _, _, b2 = _theta_sum(lam * Q, ctx)
        if abs(S2) <= 1e3 * ctx.eps * b2:
            raise PoleAtThetaZero("theta(lambda Q) vanishes")
        return S1 / S2
    if method == "product":
        u1, v1 = _factor_arrays(Q, ctx)
        u2, v2 = _factor_arrays(lam * Q, ctx)
        if ctx.is_native:
            num_u = np.ones(max(len(u1), len(u2)), complex)
            num_u[: len(u1)] = 1 + u1
            den_u = np.ones_like(num_u)
            den_u[: len(u2)] = 1 + u2
            num_v = np.ones(max(len(v1), len(v2)), complex)
            num_v[: len(v1)] = 1 + v1
            den_v = np.ones_like(num_v)
            den_v[: len(v2)] = 1 + v2
            _pole_guard(den_u, ctx)
            _pole_guard(den_v, ctx)
            return complex(np.prod(num_u / den_u) * np.prod(num_v / den_v))
        value = ctx.one
        for arr_n, arr_d in ((u1, u2), (v1, v2)):
            for i in range(max(len(arr_n), len(arr_d))):
                num = 1 + arr_n[i] if i < len(arr_n) else 1
                den = 1 + arr_d[i] if i < len(arr_d) else 1
                if abs(den) < 1e3 * ctx.eps:
                    raise PoleAtThetaZero("theta(lambda Q) vanishes")
                value *= num / den
        return value
    raise ValidationError(f"unknown theta method {method!r}")


# --------------------------------------------------------------------------
# q-Gamma
# --------------------------------------------------------------------------


def qgamma(x, ctx: EvalContext):
    """``Gamma_q(x) = (q;q)/(q^x;q) (1-q)^(1-x)``, evaluated through logarithms."""
    x = ctx.num(x)
    qx = ctx.qpow(x)
    lden = log_qpoch_inf(qx, ctx)
    if lden is None:
        raise PoleAtNonpositive(f"Gamma_q has a pole at x = {x}")
    lnum = log_qpoch_inf(ctx.qv, ctx)
    return ctx.exp(lnum - lden + (1 - x) * ctx.log(1 - ctx.qv))


# --------------------------------------------------------------------------
# basic hypergeometric series
# --------------------------------------------------------------------------


def qhyper(numer: Sequence, denom: Sequence, ctx: EvalContext, z, N: int | None = None) -> SeriesValue:
    """Partial sum of ``r phi s (numer; denom; q; z)`` over ``d = 0..N``.

    With ``N=None`` the sum runs until the terms drop below ``tol`` relative
    to the partial sum (iteration cap ``10**6``).
    """
    a = [ctx.num(x) for x in numer]
    b = [ctx.num(x) for x in denom]
    z = ctx.num(z)
    r, s = len(a), len(b)
    balance = 1 + s - r
    q = ctx.qv
    term = ctx.one
    total = ctx.one
    qd = ctx.one
    d = 0
    cap = N if N is not None else ITERATION_CAP
    small = 0
    while d < cap:
        num = z
        for x in a:
            num *= 1 - x * qd
        den = 1 - qd * q
        for x in b:
            f = 1 - x * qd
            if abs(f) < 1e3 * ctx.eps:
                raise DenominatorPochhammerZero(f"denominator Pochhammer vanishes at d = {d + 1}")
            den *= f
        if balance:
            num *= (-qd) ** balance
        term = term * num / den
        total += term
        d += 1
        qd *= q
        if N is None:
            if abs(term) <= ctx.tol * abs(total):
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
    else:
        if N is None:
            raise NonConvergence("basic hypergeometric series did not converge")
    return SeriesValue(total, float(abs(term)), d + 1)


def continue_downward(step_coeffs: Callable, direct: Callable, x0, ctx: EvalContext,
                      radius: float, order: int, shift_base=1, safety: float = 0.5):
    r"""Evaluate ``f(x0)`` outside the disc where its series is summed.

    ``f`` is annihilated by ``sum_{i=0}^{order} c_i(x) f(p^i x)`` with
    ``p = q**shift_base`` and ``step_coeffs(x) = [c_0(x), ..., c_order(x)]``.
    The values ``f(p^k x0)`` are summed directly (``direct``) once
    ``|p^k x0| <= safety * radius`` and then propagated back to ``k = 0``.
    """
    x0 = ctx.num(x0)
    if abs(x0) <= safety * radius:
        return direct(x0)
    p = ctx.qpow(shift_base)
    K = math.ceil(math.log(safety * radius / float(abs(x0))) / math.log(float(abs(p))))
    vals = {}
    for k in range(K, K + order):
        vals[k] = direct(x0 * ctx.qpow(shift_base * k))
    for k in range(K - 1, -1, -1):
        x = x0 * ctx.qpow(shift_base * k)
        c = step_coeffs(x)
        scale = max(abs(v) for v in c)
        if abs(c[0]) <= 1e3 * ctx.eps * scale:
            raise NumericalError("continuation hits a singular point of the equation")
        acc = ctx.zero
        for i in range(1, order + 1):
            acc += c[i] * vals[k + i]
        vals[k] = -acc / c[0]
    return vals[0]


def _poly_coeffs(roots_scaled: Sequence, ctx: EvalContext):
    """Coefficients of ``prod (1 - r tau)`` in increasing powers of ``tau``."""
    c = [ctx.one]
    for r in roots_scaled:
        nxt = c + [ctx.zero]
        for i in range(len(c)):
            nxt[i + 1] -= r * c[i]
        c = nxt
    return c


def qhyper_value(numer: Sequence, denom: Sequence, z, ctx: EvalContext) -> complex:
    """Value of ``r phi s`` at ``z``, analytically continued when ``r = s + 1``.

    Inside ``|z| < 0.9`` the series is summed.  Otherwise (``r = s + 1``) the
    value follows from the q-difference equation
    ``[(1 - tau) prod_j (1 - b_j tau / q) - z prod_i (1 - a_i tau)] phi = 0``
    stepped down from small ``|z|``.
    """
    z = ctx.num(z)
    r, s = len(numer), len(denom)

    def direct(x):
        return qhyper(numer, denom, ctx, x).value

    if abs(z) < 0.9 or r != s + 1:
        return direct(z)
    A = _poly_coeffs([ctx.one] + [ctx.num(b) / ctx.qv for b in denom], ctx)
    B = _poly_coeffs([ctx.num(a) for a in numer], ctx)

    def step(x):
        return [A[i] - x * B[i] for i in range(r + 1)]

    return continue_downward(step, direct, z, ctx, radius=1.0, order=r)
