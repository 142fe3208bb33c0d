"""Truncated series, the nilpotent coefficient ring and the evaluation context.

Three small algebraic containers carry everything else in the package:

``EvalContext``
    the base ``q``, the working precision and the truncation tolerance.  At
    53 bits the arithmetic is Python ``complex``; above that (or on request)
    a private :class:`mpmath.MPContext` supplies ``mpc`` numbers, which also
    removes the exponent range limits of binary64.
``FracPowerSeries``
    ``sum_k c_k x^(h + k/s)`` truncated at ``k = N``; exponents are exact
    rationals.
``NilpotentPoly``
    elements ``b_0 + b_1 e + ... + b_(n-1) e^(n-1)`` of ``C[e]/(e^n)``, used
    for expansions in ``e = 1 - P``.

Examples
--------
>>> from fractions import Fraction
>>> a = FracPowerSeries.from_coeffs([1, 1], trunc_order=4)
>>> b = FracPowerSeries.from_coeffs([1, -1], trunc_order=4)
>>> (a * b).coeffs
(1, 0, -1, 0, 0)
>>> x = NilpotentPoly((2, 1, 0))
>>> x.inv().coeffs
(0.5, -0.25, 0.125)
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import mpmath

from .errors import NonInvertible, ValidationError

__all__ = [
    "EvalContext",
    "FracPowerSeries",
    "NilpotentPoly",
    "as_fraction",
    "binomial_scalar_power",
    "nilpotent_arith",
    "series_arith",
    "series_sigma",
]


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction or ``"a/b"`` string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float) and x.is_integer():
        return Fraction(int(x))
    raise ValidationError(f"exponent {x!r} is not an exact rational")


def _scalar_fn(name: str, x):
    """Apply ``exp``/``log``/... using mpmath when ``x`` is an mpmath number."""
    ctx = getattr(x, "context", None)
    if ctx is not None:
        return getattr(ctx, name)(x)
    return getattr(cmath, name)(x)


# --------------------------------------------------------------------------
# evaluation context
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalContext:
    """Base ``q``, working precision (bits) and truncation tolerance.

    Parameters
    ----------
    q : complex or Fraction
        Base of the q-shift, ``0 < |q| < 1``.
    precision : int
        Working precision in bits.  53 selects binary64.
    tol : float, optional
        Relative truncation tolerance for infinite products and series;
        defaults to ``2**-precision``.
    backend : {"auto", "native", "mpmath"}
        ``auto`` picks ``native`` at 53 bits or less.  ``mpmath`` at 53 bits
        is useful when coefficients leave the binary64 exponent range.
    """

    q: Any = 0.5
    precision: int = 53
    tol: float | None = None
    backend: str = "auto"
    mp: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.precision) != self.precision or self.precision < 10:
            raise ValidationError("precision must be an integer number of bits >= 10")
        backend = self.backend
        if backend == "auto":
            backend = "native" if self.precision <= 53 else "mpmath"
        if backend not in ("native", "mpmath"):
            raise ValidationError(f"unknown backend {self.backend!r}")
        if backend == "native" and self.precision > 53:
            raise ValidationError("the native backend is limited to 53 bits")
        object.__setattr__(self, "backend", backend)
        if backend == "mpmath":
            mp = mpmath.MPContext()
            mp.prec = int(self.precision)
            object.__setattr__(self, "mp", mp)
        qv = self.num(self.q)
        if not 0 < abs(qv) < 1:
            raise ValidationError("EvalContext requires 0 < |q| < 1")
        tol = self.tol if self.tol is not None else 2.0 ** (-int(self.precision))
        if not tol > 0:
            raise ValidationError("tol must be positive")
        object.__setattr__(self, "tol", float(tol))
        object.__setattr__(self, "_qv", qv)
        object.__setattr__(self, "_logq", self.log(qv))

    # conversions -----------------------------------------------------------
    @property
    def is_native(self) -> bool:
        return self.backend == "native"

    @property
    def qv(self):
        """Numeric value of ``q`` in the working type."""
        return self._qv

    @property
    def logq(self):
        """Principal logarithm of ``q``."""
        return self._logq

    @property
    def eps(self) -> float:
        return 2.0 ** (-int(self.precision))

    def num(self, x):
        """Convert ``x`` (int, float, complex, Fraction, mpc) to the working type."""
        if isinstance(x, Fraction):
            if self.mp is None:
                return complex(x.numerator / x.denominator)
            return self.mp.mpc(self.mp.mpf(x.numerator) / x.denominator)
        if isinstance(x, str):
            return self.num(complex(x.replace(" ", "")) if "j" in x else Fraction(x))
        if self.mp is None:
            return complex(x)
        return self.mp.mpc(x)

    def with_q(self, q) -> "EvalContext":
        return EvalContext(q=q, precision=self.precision, tol=self.tol, backend=self.backend)

    # elementary functions ---------------------------------------------------
    @property
    def zero(self):
        return self.num(0)

    @property
    def one(self):
        return self.num(1)

    @property
    def pi(self):
        return math.pi if self.mp is None else self.mp.pi

    def exp(self, x):
        return cmath.exp(x) if self.mp is None else self.mp.exp(x)

    def log(self, x):
        return cmath.log(x) if self.mp is None else self.mp.log(x)

    def sqrt(self, x):
        return cmath.sqrt(x) if self.mp is None else self.mp.sqrt(x)

    def sin(self, x):
        return cmath.sin(x) if self.mp is None else self.mp.sin(x)

    def power(self, x, y):
        """Principal branch ``x**y = exp(y log x)`` with ``0**y = 0``."""
        x = self.num(x)
        if x == 0:
            return self.zero
        return self.exp(self.num(y) * self.log(x))

    def qpow(self, e):
        """``q**e`` for a rational or complex exponent, principal branch."""
        if e == 0:
            return self.one
        if isinstance(e, int) and self.mp is None and 0 < e < 64:
            return self._qv**e
        return self.exp(self.num(e) * self._logq)

    def root_of_unity(self, k: int, n: int):
        """``exp(2 pi i k / n)``."""
        k %= n
        if self.mp is None:
            return cmath.exp(2j * math.pi * k / n)
        return self.mp.expjpi(self.mp.mpf(2 * k) / n)


# --------------------------------------------------------------------------
# fractional power series
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FracPowerSeries:
    """Truncated series ``sum_{k=0}^{N} c_k x^(h + k/s)``.

    The series is known exactly up to the exponent ``h + N/s`` (inclusive).
    Arithmetic keeps the smallest known range and never invents
    coefficients beyond it.
    """

    base_exponent: Fraction
    denom: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "base_exponent", as_fraction(self.base_exponent))
        if int(self.denom) != self.denom or self.denom < 1:
            raise ValidationError("denom must be a positive integer")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, trunc_order: int | None = None,
                    base_exponent=Fraction(0), denom: int = 1) -> "FracPowerSeries":
        coeffs = list(coeffs)
        if trunc_order is not None:
            coeffs = coeffs[: trunc_order + 1] + [0] * (trunc_order + 1 - len(coeffs))
        return cls(as_fraction(base_exponent), denom, tuple(coeffs))

    @classmethod
    def monomial(cls, exponent, coeff=1, trunc_exponent=None, denom: int | None = None):
        """``coeff * x**exponent`` known up to ``trunc_exponent``."""
        exponent = as_fraction(exponent)
        if trunc_exponent is None:
            trunc_exponent = exponent
        trunc_exponent = as_fraction(trunc_exponent)
        if denom is None:
            denom = math.lcm(exponent.denominator, trunc_exponent.denominator)
        n = (trunc_exponent - exponent) * denom
        if n.denominator != 1:
            raise ValidationError("truncation exponent is off the coefficient grid")
        return cls(exponent, denom, (coeff,) + (0,) * int(n))

    @property
    def trunc_order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def top_exponent(self) -> Fraction:
        """Largest exponent whose coefficient is known."""
        return self.base_exponent + Fraction(self.trunc_order, self.denom)

    def exponent(self, k: int) -> Fraction:
        return self.base_exponent + Fraction(k, self.denom)

    def items(self):
        """Iterate over ``(exponent, coefficient)`` pairs."""
        for k, c in enumerate(self.coeffs):
            yield self.exponent(k), c

    def coefficient(self, e) -> Any:
        """Coefficient of ``x**e``; zero below the base, error above the top."""
        e = as_fraction(e)
        if e > self.top_exponent:
            raise ValidationError(f"exponent {e} beyond truncation {self.top_exponent}")
        k = (e - self.base_exponent) * self.denom
        if k < 0 or k.denominator != 1:
            return 0
        return self.coeffs[int(k)]

    # grid manipulation -----------------------------------------------------
    def lift(self, denom: int) -> "FracPowerSeries":
        """Same series on the finer grid ``1/denom`` (a multiple of ``self.denom``)."""
        if denom % self.denom:
            raise ValidationError("lift target must be a multiple of the current denom")
        r = denom // self.denom
        if r == 1:
            return self
        out = [0] * (self.trunc_order * r + 1) if self.coeffs else []
        for k, c in enumerate(self.coeffs):
            out[k * r] = c
        return FracPowerSeries(self.base_exponent, denom, tuple(out))

    def rebase(self, base, denom: int | None = None) -> "FracPowerSeries":
        """Re-express with a lower base exponent (padding zeros)."""
        base = as_fraction(base)
        denom = denom or self.denom
        s = self.lift(denom)
        shift = (s.base_exponent - base) * denom
        if shift < 0 or shift.denominator != 1:
            raise ValidationError("rebase target must lie below on the same grid")
        if not s.coeffs:
            return FracPowerSeries(base, denom, ())
        return FracPowerSeries(base, denom, (0,) * int(shift) + s.coeffs)

    def truncate(self, top) -> "FracPowerSeries":
        """Drop coefficients above exponent ``top``."""
        top = as_fraction(top)
        n = math.floor((top - self.base_exponent) * self.denom)
        return FracPowerSeries(self.base_exponent, self.denom, self.coeffs[: max(n + 1, 0)])

    def shifted(self, e) -> "FracPowerSeries":
        """Multiply by the monomial ``x**e``."""
        return FracPowerSeries(self.base_exponent + as_fraction(e), self.denom, self.coeffs)

    def map(self, fn: Callable) -> "FracPowerSeries":
        return FracPowerSeries(self.base_exponent, self.denom, tuple(fn(c) for c in self.coeffs))

    # arithmetic --------------------------------------------------------------
    def _aligned(self, other: "FracPowerSeries"):
        diff = self.base_exponent - other.base_exponent
        L = math.lcm(self.denom, other.denom, diff.denominator)
        base = min(self.base_exponent, other.base_exponent)
        top = min(self.top_exponent, other.top_exponent)
        a = self.lift(L).rebase(base, L).truncate(top)
        b = other.lift(L).rebase(base, L).truncate(top)
        return a, b, base, L

    def __add__(self, other):
        if not isinstance(other, FracPowerSeries):
            return NotImplemented
        a, b, base, L = self._aligned(other)
        return FracPowerSeries(base, L, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        if not isinstance(other, FracPowerSeries):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FracPowerSeries):
            L = math.lcm(self.denom, other.denom)
            a, b = self.lift(L), other.lift(L)
            base = a.base_exponent + b.base_exponent
            top = min(a.top_exponent + b.base_exponent, b.top_exponent + a.base_exponent)
            n = int((top - base) * L) + 1
            out = []
            for k in range(max(n, 0)):
                acc = 0
                for i in range(k + 1):
                    acc += a.coeffs[i] * b.coeffs[k - i]
                out.append(acc)
            return FracPowerSeries(base, L, tuple(out))
        return self.map(lambda c: c * other)

    __rmul__ = __mul__

    def sigma(self, ctx: EvalContext, shift_base=Fraction(1), power: int = 1) -> "FracPowerSeries":
        """Apply ``sigma^power`` with ``sigma x = q**shift_base * x``."""
        step = as_fraction(shift_base) * power
        return FracPowerSeries(
            self.base_exponent, self.denom,
            tuple(c * ctx.qpow(step * e) if c != 0 else c for e, c in self.items()),
        )

    def evaluate(self, x, ctx: EvalContext):
        """Sum the truncated series at ``x`` (principal branch for fractional powers)."""
        x = ctx.num(x)
        logx = ctx.log(x)
        total = ctx.zero
        for e, c in self.items():
            if c != 0:
                total += c * ctx.exp(ctx.num(e) * logx)
        return total

    def max_abs(self):
        return max((abs(c) for c in self.coeffs), default=0)


def series_arith(a: FracPowerSeries, b, kind: str) -> FracPowerSeries:
    """``kind`` in {"add", "mul", "scale"}; for ``scale`` ``b`` is a scalar."""
    if kind == "add":
        return a + b
    if kind == "mul":
        return a * b
    if kind == "scale":
        return a.map(lambda c: c * b)
    raise ValidationError(f"unknown series operation {kind!r}")


def series_sigma(a: FracPowerSeries, ctx: EvalContext, shift_base=Fraction(1)) -> FracPowerSeries:
    """``sigma_q`` on a series: ``x**e -> q**(b e) x**e``."""
    return a.sigma(ctx, shift_base)


# --------------------------------------------------------------------------
# nilpotent polynomials
# --------------------------------------------------------------------------


def binomial_scalar_power(x, k: int):
    """``C(x, k) = x (x-1) ... (x-k+1) / k!`` for a scalar ``x``.

    >>> binomial_scalar_power(0.5, 2)
    -0.125
    """
    if k < 0:
        raise ValidationError("k must be nonnegative")
    acc = 1
    for j in range(k):
        acc = acc * (x - j) / (j + 1)
    return acc


@dataclass(frozen=True)
class NilpotentPoly:
    """Element of ``C[e]/(e^n)`` stored as ``(b_0, ..., b_(n-1))``."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise ValidationError("NilpotentPoly needs order >= 1")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    # constructors --------------------------------------------------------------
    @classmethod
    def constant(cls, c, n: int) -> "NilpotentPoly":
        return cls((c,) + (0 * c,) * (n - 1))

    @classmethod
    def unit(cls, n: int, one=1) -> "NilpotentPoly":
        return cls.constant(one, n)

    @classmethod
    def epsilon(cls, n: int, one=1) -> "NilpotentPoly":
        """The generator ``e`` (zero when ``n == 1``)."""
        c = [0 * one] * n
        if n > 1:
            c[1] = one
        return cls(tuple(c))

    @classmethod
    def character(cls, n: int, one=1) -> "NilpotentPoly":
        """``P = 1 - e``."""
        c = [0 * one] * n
        c[0] = one
        if n > 1:
            c[1] = -one
        return cls(tuple(c))

    def _coerce(self, other):
        if isinstance(other, NilpotentPoly):
            if other.order != self.order:
                raise ValidationError("nilpotent orders differ")
            return other
        return NilpotentPoly.constant(other, self.order)

    # ring operations -------------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        return NilpotentPoly(tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return NilpotentPoly(tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, NilpotentPoly):
            return NilpotentPoly(tuple(a * other for a in self.coeffs))
        o = self._coerce(other)
        n = self.order
        a, b = self.coeffs, o.coeffs
        out = []
        for k in range(n):
            acc = a[0] * b[k]
            for i in range(1, k + 1):
                acc += a[i] * b[k - i]
            out.append(acc)
        return NilpotentPoly(tuple(out))

    __rmul__ = __mul__

    def inv(self) -> "NilpotentPoly":
        """Multiplicative inverse by forward substitution."""
        a = self.coeffs
        if a[0] == 0:
            raise NonInvertible("constant term vanishes")
        inv0 = 1 / a[0]
        out = [inv0]
        for k in range(1, self.order):
            acc = 0
            for i in range(1, k + 1):
                acc += a[i] * out[k - i]
            out.append(-acc * inv0)
        return NilpotentPoly(tuple(out))

    def __truediv__(self, other):
        if isinstance(other, NilpotentPoly):
            return self * other.inv()
        return NilpotentPoly(tuple(a / other for a in self.coeffs))

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inv()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return self.power(k)
        if k < 0:
            return self.inv() ** (-k)
        result = NilpotentPoly.unit(self.order, 1 + 0 * self.coeffs[0])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # analytic functions -------------------------------------------------------------
    def nilpotent_part(self) -> "NilpotentPoly":
        return NilpotentPoly((0 * self.coeffs[0],) + self.coeffs[1:])

    def compose(self, taylor: Sequence) -> "NilpotentPoly":
        """``f(self)`` given ``taylor[k] = f^(k)(b_0)/k!`` for ``k < n``."""
        d = self.nilpotent_part()
        power = NilpotentPoly.unit(self.order, 1 + 0 * self.coeffs[0])
        result = NilpotentPoly.constant(0 * self.coeffs[0], self.order)
        for k in range(self.order):
            result = result + power * taylor[k]
            power = power * d
        return result

    def exp(self) -> "NilpotentPoly":
        b0 = self.coeffs[0]
        e0 = _scalar_fn("exp", b0) if b0 != 0 else 1 + 0 * b0
        fact = [1]
        for k in range(1, self.order):
            fact.append(fact[-1] * k)
        return self.compose([e0 / f for f in fact])

    def log(self) -> "NilpotentPoly":
        """Principal logarithm of the constant term plus the nilpotent series."""
        b0 = self.coeffs[0]
        if b0 == 0:
            raise NonInvertible("log of a nilpotent element")
        taylor = [_scalar_fn("log", b0)]
        for k in range(1, self.order):
            taylor.append((-1) ** (k + 1) / (k * b0**k))
        return self.compose(taylor)

    def power(self, x) -> "NilpotentPoly":
        """``self**x`` for scalar ``x``: ``b_0**x * sum_k C(x, k) y**k``, ``self = b_0 (1 + y)``."""
        b0 = self.coeffs[0]
        if b0 == 0:
            raise NonInvertible("non-integer power of a nilpotent element")
        y = self / b0 - 1
        lead = b0**x
        power = NilpotentPoly.unit(self.order, 1 + 0 * b0)
        result = NilpotentPoly.constant(0 * b0, self.order)
        for k in range(self.order):
            result = result + power * binomial_scalar_power(x, k)
            power = power * y
        return result * lead

    def max_abs(self):
        return max(abs(c) for c in self.coeffs)


def nilpotent_arith(a: NilpotentPoly, b: NilpotentPoly | None, kind: str) -> NilpotentPoly:
    """``kind`` in {"add", "mul", "inv", "div"}; ``b`` is ignored for ``inv``."""
    if kind == "add":
        return a + b
    if kind == "mul":
        return a * b
    if kind == "inv":
        return a.inv()
    if kind == "div":
        return a / b
    raise ValidationError(f"unknown nilpotent operation {kind!r}")
