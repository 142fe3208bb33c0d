r"""q-difference operators ``sum_i a_i(x) sigma^i``.

An operator is stored fully expanded with coefficients on the left of the
shift powers.  Each coefficient monomial is ``c * q^g * x^e`` with a numeric
mantissa ``c`` and exact rational exponents ``g`` and ``e``.  The shift acts
by ``sigma x = q^b x`` where ``b`` is the operator's ``shift_base`` (1 for
``sigma_q`` on ``Q``; ``1/s`` after the substitution ``z = Q^(1/s)``), so

    sigma x^a = q^(a b) x^a sigma.

Text form (see :func:`parse_operator`)::

    (1 - S)^5 - Q*(1 - q^1*S^5)*(1 - q^2*S^5)*(1 - q^3*S^5)*(1 - q^4*S^5)*(1 - q^5*S^5)

Examples
--------
>>> op = parse_operator("Q*S - S*Q")
>>> format_operator(op)
'Q*S - q*Q*S'
>>> newton_polygon(parse_operator("(1 - S)^2 - Q*S^3")).vertices
((0, Fraction(1, 1)), (1, Fraction(0, 1)), (3, Fraction(0, 1)))
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .algebra import EvalContext, FracPowerSeries, as_fraction
from .errors import NonIntegerShiftPower, NotHorizontal, ParseError, TruncationTooShort, ValidationError

__all__ = [
    "CharPoly",
    "NewtonPolygon",
    "QDiffOperator",
    "QMonomial",
    "Segment",
    "SolutionObject",
    "adams_substitute",
    "apply",
    "apply_with_scale",
    "characteristic_equation",
    "conjugate_by_character",
    "format_operator",
    "invert_variable",
    "newton_polygon",
    "operator_from_json",
    "operator_to_json",
    "parse_operator",
    "pointwise_residual",
    "relative_residual",
]

ONE = Fraction(1)
ZERO = Fraction(0)


def _canon(c):
    """Simplest Python type for a mantissa (exact where possible)."""
    if isinstance(c, bool):
        return int(c)
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, complex) and c.imag == 0:
        c = c.real
    if isinstance(c, float) and c.is_integer() and abs(c) < 2**53:
        return int(c)
    return c


def _mdiv(a, b):
    """Mantissa division, exact for rationals."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return _canon(Fraction(a) / Fraction(b))
    return _canon(a / b)


# --------------------------------------------------------------------------
# exact characters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QMonomial:
    """The number ``mantissa * q^q_exp`` with an exact rational ``q_exp``."""

    mantissa: Any = 1
    q_exp: Fraction = ZERO

    def __post_init__(self):
        object.__setattr__(self, "q_exp", as_fraction(self.q_exp))

    def value(self, ctx: EvalContext):
        return ctx.num(self.mantissa) * ctx.qpow(self.q_exp)

    def __pow__(self, k: int) -> "QMonomial":
        return QMonomial(self.mantissa**k, self.q_exp * k)

    def __mul__(self, other) -> "QMonomial":
        if isinstance(other, QMonomial):
            return QMonomial(self.mantissa * other.mantissa, self.q_exp + other.q_exp)
        return QMonomial(self.mantissa * other, self.q_exp)


def _char_value(lam, ctx: EvalContext):
    return lam.value(ctx) if isinstance(lam, QMonomial) else ctx.num(lam)


# --------------------------------------------------------------------------
# the operator type
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QDiffOperator:
    """Expanded operator; ``terms`` maps ``(shift, x_exp, q_exp)`` to a mantissa.

    ``unit`` records the factor ``(mantissa, x_exp, q_exp)`` by which a
    normalizing transformation (inversion, Adams substitution) multiplied the
    operator on the left, so that residuals can be compared.
    """

    terms: Mapping
    variable: str = "Q"
    shift_base: Fraction = ONE
    unit: tuple = field(default=(1, ZERO, ZERO), compare=False)

    def __post_init__(self):
        merged: dict = {}
        for key, c in dict(self.terms).items():
            i, e, g = key
            if int(i) != i:
                raise NonIntegerShiftPower(f"shift power {i} is not an integer")
            k = (int(i), as_fraction(e), as_fraction(g))
            merged[k] = merged.get(k, 0) + c
        clean = {k: _canon(v) for k, v in sorted(merged.items()) if v != 0}
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "shift_base", as_fraction(self.shift_base))
        if any(k[0] < 0 for k in clean):
            raise NonIntegerShiftPower("negative shift power")
        if self.variable in ("S", "q") or not re.fullmatch(r"[A-Za-z_]\w*", self.variable):
            raise ValidationError(f"invalid variable name {self.variable!r}")

    # construction -----------------------------------------------------------------
    @classmethod
    def monomial(cls, c=1, x_exp=ZERO, q_exp=ZERO, shift: int = 0, variable="Q", shift_base=ONE):
        return cls({(shift, as_fraction(x_exp), as_fraction(q_exp)): c}, variable, shift_base)

    def _like(self, terms, unit=None, variable=None) -> "QDiffOperator":
        return QDiffOperator(terms, variable or self.variable, self.shift_base,
                             self.unit if unit is None else unit)

    def _check(self, other: "QDiffOperator"):
        if other.variable != self.variable or other.shift_base != self.shift_base:
            raise ValidationError("operators live in different variables")

    # algebra --------------------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, QDiffOperator):
            other = QDiffOperator.monomial(other, variable=self.variable, shift_base=self.shift_base)
        self._check(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            t[k] = t.get(k, 0) + c
        return self._like(t)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, QDiffOperator):
            other = QDiffOperator.monomial(other, variable=self.variable, shift_base=self.shift_base)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, QDiffOperator):
            return self._like({k: c * other for k, c in self.terms.items()})
        self._check(other)
        b = self.shift_base
        out: dict = {}
        for (i1, e1, g1), c1 in self.terms.items():
            for (i2, e2, g2), c2 in other.terms.items():
                k = (i1 + i2, e1 + e2, g1 + g2 + b * i1 * e2)
                out[k] = out.get(k, 0) + c1 * c2
        return self._like(out)

    def __rmul__(self, other):
        return self._like({k: other * c for k, c in self.terms.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValidationError("operator powers must be nonnegative integers")
        result = QDiffOperator.monomial(1, variable=self.variable, shift_base=self.shift_base)
        for _ in range(k):
            result = result * self
        return result

    # inspection ---------------------------------------------------------------------------
    @property
    def shifts(self) -> tuple:
        return tuple(sorted({k[0] for k in self.terms}))

    @property
    def order(self) -> int:
        return max(self.shifts) if self.terms else 0

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, shift: int) -> list:
        """``[(x_exp, q_exp, mantissa), ...]`` of ``a_shift``."""
        return [(e, g, c) for (i, e, g), c in self.terms.items() if i == shift]

    def lowest_exponent(self, shift: int):
        es = [e for (i, e, _), _c in self.terms.items() if i == shift]
        return min(es) if es else None

    def coeff_value(self, shift: int, x, ctx: EvalContext):
        """Numeric value of ``a_shift(x)`` (principal branch for fractional powers)."""
        x = ctx.num(x)
        logx = ctx.log(x)
        total = ctx.zero
        for e, g, c in self.coefficient(shift):
            total += ctx.num(c) * ctx.qpow(g) * ctx.exp(ctx.num(e) * logx)
        return total

    def grouped(self, ctx: EvalContext) -> dict:
        """Numeric coefficients keyed by ``(shift, x_exp)``."""
        out: dict = {}
        for (i, e, g), c in self.terms.items():
            out[(i, e)] = out.get((i, e), ctx.zero) + ctx.num(c) * ctx.qpow(g)
        return out

    def __str__(self):
        return format_operator(self)


# --------------------------------------------------------------------------
# text and JSON forms
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?j?)|(?P<id>[A-Za-z_]\w*)|(?P<op>[-+*^()/]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.replace("−", "-")
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, variable: str, shift_base: Fraction):
        self.toks = _tokenize(text)
        self.i = 0
        self.var = variable
        self.b = shift_base

    def peek(self):
        return self.toks[self.i]

    def take(self, value=None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def mono(self, c=1, e=ZERO, g=ZERO, i=0):
        return QDiffOperator({(i, e, g): c}, self.var, self.b)

    def expression(self):
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        result = self.term() * sign
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            t = self.term()
            result = result + t if op == "+" else result - t
        return result

    def term(self):
        result = self.factor()
        while self.peek()[1] == "*":
            self.take()
            result = result * self.factor()
        return result

    def integer(self):
        tok = self.take()
        if tok[0] != "num" or not tok[1].isdigit():
            raise ParseError(f"expected an integer, found {tok[1] or 'end of input'!r}", tok[2])
        return int(tok[1])

    def rational(self):
        paren = self.peek()[1] == "("
        if paren:
            self.take()
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        elif self.peek()[1] == "+":
            self.take()
        start = self.peek()[2]
        num = self.integer()
        den = 1
        if self.peek()[1] == "/":
            self.take()
            den = self.integer()
            if den == 0:
                raise ParseError("zero denominator", start)
        if paren:
            self.take(")")
        return Fraction(sign * num, den)

    def factor(self):
        if self.peek()[1] == "-" and self.peek()[0] == "op":
            self.take()
            return -self.factor()
        kind, value, pos = self.peek()
        base = self.atom()
        if self.peek()[1] != "^":
            return base
        self.take()
        epos = self.peek()[2]
        r = self.rational()
        return self.power(base, r, epos, kind, value)

    def power(self, base: QDiffOperator, r: Fraction, pos: int, kind: str, value: str):
        has_shift = any(k[0] for k in base.terms)
        if r.denominator == 1 and r >= 0:
            return base**int(r)
        if has_shift:
            raise NonIntegerShiftPower(f"shift raised to the power {r} (at position {pos})")
        if len(base.terms) == 1:
            ((_, e, g), c), = base.terms.items()
            if c == 1:
                return self.mono(1, e * r, g * r)
            if r.denominator == 1:
                return self.mono(Fraction(1) / Fraction(c) ** -int(r) if isinstance(c, (int, Fraction))
                                 else c**int(r), e * r, g * r)
        raise ParseError(f"only monomials may carry the exponent {r}", pos)

    def atom(self):
        kind, value, pos = self.take()
        if kind == "op" and value == "(":
            inner = self.expression()
            self.take(")")
            return inner
        if kind == "id":
            if value == "S":
                return self.mono(1, i=1)
            if value == "q":
                return self.mono(1, g=ONE)
            if value == self.var:
                return self.mono(1, e=ONE)
            raise ParseError(f"unknown symbol {value!r}", pos)
        if kind == "num":
            if value.endswith("j"):
                c = complex(0, float(value[:-1]))
            elif re.fullmatch(r"\d+", value):
                c = int(value)
            else:
                c = _canon(Fraction(value))
            if self.peek()[1] == "/" and not isinstance(c, complex):
                self.take()
                den = self.integer()
                if den == 0:
                    raise ParseError("zero denominator", pos)
                c = _canon(Fraction(c) / den)
            return self.mono(c)
        raise ParseError(f"unexpected token {value or 'end of input'!r}", pos)


def parse_operator(text: str, variable: str = "Q", shift_base=ONE) -> QDiffOperator:
    """Parse the operator DSL.

    Grammar::

        expression := ['+'|'-'] term (('+'|'-') term)*
        term       := factor ('*' factor)*
        factor     := ['-'] atom ('^' rational)?
        atom       := '(' expression ')' | VAR | 'S' | 'q' | number ['/' integer]
        rational   := ['-'] integer ['/' integer] | '(' ['-'] integer ['/' integer] ')'

    ``S`` is the shift, ``q`` the base, ``VAR`` the declared variable.
    Numbers may carry a ``j`` suffix (imaginary).  Shift powers must be
    nonnegative integers; monomials such as ``Q`` or ``q`` accept any
    rational power.
    """
    p = _Parser(text, variable, as_fraction(shift_base))
    if p.peek()[0] == "end":
        raise ParseError("empty operator", 0)
    result = p.expression()
    kind, value, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected token {value!r}", pos)
    if result.is_zero:
        raise ParseError("operator expands to zero", 0)
    return result


def _fmt_exp(r: Fraction) -> str:
    if r.denominator == 1 and r >= 0:
        return str(r.numerator)
    return f"({r.numerator}/{r.denominator})" if r.denominator != 1 else f"({r.numerator})"


def _fmt_mantissa(c):
    """Return (sign, text) with text empty for magnitude one."""
    if isinstance(c, complex) or hasattr(c, "imag") and not isinstance(c, (int, Fraction, float)):
        c = complex(c)
        if c.imag == 0:
            c = _canon(c.real)
        elif c.real == 0:
            return (-1 if c.imag < 0 else 1), f"{abs(c.imag)!r}j"
        else:
            return 1, f"({c.real!r}{c.imag:+}j)".replace("+-", "-")
    sign = -1 if c < 0 else 1
    a = abs(c)
    if a == 1:
        return sign, ""
    if isinstance(a, Fraction):
        return sign, f"{a.numerator}/{a.denominator}"
    return sign, repr(a) if isinstance(a, float) else str(a)


def format_operator(op: QDiffOperator) -> str:
    """Canonical text form; ``parse_operator`` reads it back to the same terms."""
    parts = []
    for (i, e, g), c in op.terms.items():
        sign, mant = _fmt_mantissa(c)
        factors = [mant] if mant else []
        if g != 0:
            factors.append("q" if g == 1 else f"q^{_fmt_exp(g)}")
        if e != 0:
            factors.append(op.variable if e == 1 else f"{op.variable}^{_fmt_exp(e)}")
        if i:
            factors.append("S" if i == 1 else f"S^{i}")
        body = "*".join(factors) or "1"
        parts.append((sign, body))
    if not parts:
        return "0"
    text = ("-" if parts[0][0] < 0 else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += (" - " if sign < 0 else " + ") + body
    return text


def _json_number(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x
    return float(x)


def operator_to_json(op: QDiffOperator) -> dict:
    """JSON mirror ``{"variable", "shift_base", "terms": [{"shift", "coeff": [...]}]}``."""
    terms = []
    for i in op.shifts:
        coeff = []
        for e, g, c in op.coefficient(i):
            if isinstance(c, (int, Fraction)):
                re_, im_ = _json_number(c), 0
            else:
                z = complex(c)
                re_, im_ = _json_number(_canon(z.real)), _json_number(_canon(z.imag))
            coeff.append({"Q_exp": f"{e.numerator}/{e.denominator}",
                          "q_exp": f"{g.numerator}/{g.denominator}", "re": re_, "im": im_})
        terms.append({"shift": i, "coeff": coeff})
    b = op.shift_base
    return {"variable": op.variable, "shift_base": f"{b.numerator}/{b.denominator}", "terms": terms}


def _read_number(x):
    if isinstance(x, str):
        return _canon(Fraction(x))
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return _canon(x)
    raise ValidationError(f"invalid number {x!r}")


def operator_from_json(data) -> QDiffOperator:
    """Inverse of :func:`operator_to_json`; accepts a dict or a JSON string."""
    if isinstance(data, str):
        data = json.loads(data)
    try:
        variable = data.get("variable", "Q")
        b = as_fraction(data.get("shift_base", "1"))
        terms = {}
        for block in data["terms"]:
            i = block["shift"]
            if not isinstance(i, int) or i < 0:
                raise NonIntegerShiftPower(f"shift {i!r} is not a nonnegative integer")
            for m in block["coeff"]:
                re_, im_ = _read_number(m.get("re", 0)), _read_number(m.get("im", 0))
                c = re_ if im_ == 0 else complex(float(re_), float(im_))
                key = (i, as_fraction(m.get("Q_exp", "0")), as_fraction(m.get("q_exp", "0")))
                terms[key] = terms.get(key, 0) + c
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed operator JSON: {exc}") from exc
    op = QDiffOperator(terms, variable, b)
    if op.is_zero:
        raise ValidationError("operator is zero")
    return op


# --------------------------------------------------------------------------
# transformations
# --------------------------------------------------------------------------


def _normalize(terms: dict, variable: str, b: Fraction, unit) -> QDiffOperator:
    """Clear negative exponents and make the lowest shift's lowest coefficient 1."""
    min_e = min(k[1] for k in terms)
    if min_e != 0:
        terms = {(i, e - min_e, g): c for (i, e, g), c in terms.items()}
    c0_mant, c0_e, c0_g = unit
    unit = (c0_mant, c0_e - min_e, c0_g)
    i0 = min(k[0] for k in terms)
    e0 = min(k[1] for k in terms if k[0] == i0)
    lead = [(g, c) for (i, e, g), c in terms.items() if i == i0 and e == e0]
    if len(lead) == 1:
        g0, c0 = lead[0]
        terms = {(i, e, g - g0): _mdiv(c, c0) for (i, e, g), c in terms.items()}
        unit = (_mdiv(unit[0], c0), unit[1], unit[2] - g0)
    return QDiffOperator(terms, variable, b, unit)


_INVERSE_NAMES = {"Q": "w", "w": "Q", "x": "y", "y": "x"}


def invert_variable(op: QDiffOperator, variable: str | None = None) -> QDiffOperator:
    """Rewrite the operator in ``w = 1/x`` (``sigma = tau^-1``).

    The result is ``x^m tau^n op`` normalized so that the lowest-order part
    of the ``tau^0`` coefficient is 1; the factor used is kept in ``unit``.
    """
    n = op.order
    b = op.shift_base
    terms = {}
    for (i, e, g), c in op.terms.items():
        # tau^n x^e tau^-i with x^e = w^-e:  tau^n w^-e = q^(-b n e) w^-e tau^n
        k = (n - i, -e, g - b * n * e)
        terms[k] = terms.get(k, 0) + c
    name = variable or _INVERSE_NAMES.get(op.variable, op.variable + "_inv")
    return _normalize(terms, name, b, (1, ZERO, ZERO))


def adams_substitute(op: QDiffOperator, s: int, t: int, variable: str | None = None) -> QDiffOperator:
    r"""Divide out the prefactor ``theta_{q^(t/s)}(x^(t/s))`` and pass to ``z = x^(1/s)``.

    Uses ``sigma^i Theta = Theta x^(-t i/s) q^(-b (t/s) i(i-1)/2)``.  The result
    is in ``z`` with shift base ``b/s`` and is normalized like
    :func:`invert_variable`.  ``s = 1, t = 0`` returns the operator unchanged.
    """
    if s < 1 or int(s) != s:
        raise ValidationError("s must be a positive integer")
    b = op.shift_base
    rho = Fraction(t, s)
    if s == 1 and t == 0:
        return op
    terms = {}
    for (i, e, g), c in op.terms.items():
        k = (i, (e - rho * i) * s, g - b * rho * Fraction(i * (i - 1), 2))
        terms[k] = terms.get(k, 0) + c
    name = variable or ("z" if op.variable == "Q" else f"{op.variable}_{s}")
    return _normalize(terms, name, b / s, (1, ZERO, ZERO))


def conjugate_by_character(op: QDiffOperator, lam) -> QDiffOperator:
    """``e_lam^-1 op e_lam``: multiply the ``sigma^i`` coefficient by ``lam^i``.

    ``lam`` is a number or a :class:`QMonomial` (kept exact).
    """
    if isinstance(lam, QMonomial):
        terms = {(i, e, g + lam.q_exp * i): c * lam.mantissa**i for (i, e, g), c in op.terms.items()}
    else:
        terms = {(i, e, g): c * lam**i for (i, e, g), c in op.terms.items()}
    return op._like(terms)


# --------------------------------------------------------------------------
# Newton polygon
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    start: tuple
    end: tuple
    slope: Fraction
    kind: str


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of the points ``(n - i, j_i)``."""

    points: tuple
    vertices: tuple
    segments: tuple
    order: int

    def horizontal(self) -> tuple:
        return tuple(s for s in self.segments if s.kind == "horizontal")

    def sloped(self) -> tuple:
        return tuple(s for s in self.segments if s.kind == "sloped")


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def newton_polygon(op: QDiffOperator) -> NewtonPolygon:
    """Exact lower hull (monotone chain on rational points)."""
    n = op.order
    pts = sorted((n - i, op.lowest_exponent(i)) for i in op.shifts)
    hull: list = []
    for p in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    segments = []
    for a, b in zip(hull, hull[1:]):
        slope = Fraction(b[1] - a[1]) / (b[0] - a[0])
        segments.append(Segment(a, b, slope, "horizontal" if slope == 0 else "sloped"))
    return NewtonPolygon(tuple(pts), tuple(hull), tuple(segments), n)


@dataclass(frozen=True)
class CharPoly:
    """``sum_i c_i x^i`` with exact monomial coefficients ``c_i = sum mant q^g``."""

    terms: Mapping  # power -> tuple of (mantissa, q_exp)

    @property
    def low(self) -> int:
        return min(self.terms)

    @property
    def degree(self) -> int:
        """Number of nonzero roots counted with multiplicity."""
        return max(self.terms) - min(self.terms)

    def coefficients(self, ctx: EvalContext) -> list:
        """Numeric ``[c_low, ..., c_high]``."""
        out = []
        for i in range(self.low, max(self.terms) + 1):
            out.append(sum((ctx.num(c) * ctx.qpow(g) for c, g in self.terms.get(i, ())), ctx.zero))
        return out

    def evaluate(self, x, ctx: EvalContext, derivative: bool = False):
        x = _char_value(x, ctx)
        total = ctx.zero
        for i, c in zip(range(self.low, max(self.terms) + 1), self.coefficients(ctx)):
            if derivative:
                total += i * c * x ** (i - 1) if i else 0
            else:
                total += c * x**i
        return total

    def roots(self, ctx: EvalContext) -> list:
        """Nonzero roots (numpy companion matrix, or mpmath at high precision)."""
        coeffs = self.coefficients(ctx)[::-1]
        if ctx.is_native:
            return list(np.roots(np.array(coeffs, dtype=complex)))
        return list(ctx.mp.polyroots(coeffs, maxsteps=200, extraprec=2 * ctx.precision))


def characteristic_equation(op: QDiffOperator, segment: Segment | None = None) -> CharPoly:
    """Characteristic polynomial of a horizontal Newton segment.

    Without ``segment`` the unique horizontal segment is used.
    """
    poly = newton_polygon(op)
    if segment is None:
        hs = poly.horizontal()
        if len(hs) != 1:
            raise NotHorizontal(f"operator has {len(hs)} horizontal segments; pass one explicitly")
        segment = hs[0]
    if segment.kind != "horizontal":
        raise NotHorizontal("characteristic equations exist only for horizontal segments")
    j = segment.start[1]
    n = poly.order
    terms = {}
    for x in range(segment.start[0], segment.end[0] + 1):
        i = n - x
        mono = tuple((c, g) for e, g, c in op.coefficient(i) if e == j)
        if mono:
            terms[i] = mono
    return CharPoly(terms)


# --------------------------------------------------------------------------
# solutions and their residuals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SolutionObject:
    r"""``e_lam(x) * Theta(x) * F(x)`` with ``F`` a fractional power series.

    ``theta_exponent`` is ``rho = t/s``: the prefactor satisfies
    ``sigma Theta = x^(-rho) Theta`` (for shift base 1).  ``variable`` names the
    series variable (``w = 1/Q`` for solutions at infinity).
    """

    character: Any
    series: FracPowerSeries
    theta_exponent: Fraction = ZERO
    at_infinity: bool = False
    variable: str = "Q"

    def __post_init__(self):
        object.__setattr__(self, "theta_exponent", as_fraction(self.theta_exponent))

    def character_value(self, ctx: EvalContext):
        return _char_value(self.character, ctx)

    def scaled(self, c) -> "SolutionObject":
        return SolutionObject(self.character, self.series * c, self.theta_exponent,
                              self.at_infinity, self.variable)


def _residual_pieces(op: QDiffOperator, sol: SolutionObject, ctx: EvalContext):
    lam = sol.character_value(ctx)
    rho = sol.theta_exponent
    b = op.shift_base
    F = sol.series
    if not F.coeffs:
        raise TruncationTooShort("empty solution series")
    for (i, e), coeff in op.grouped(ctx).items():
        kappa = coeff * lam**i * ctx.qpow(-b * rho * Fraction(i * (i - 1), 2))
        yield i, e - rho * i, kappa


def apply_with_scale(op: QDiffOperator, sol: SolutionObject, ctx: EvalContext):
    """Residual series of ``op`` on ``sol`` (prefactor divided out) and a scale series.

    The scale holds, for each coefficient, the sum of the magnitudes of the
    contributions, so ``|residual| / scale`` is a relative residual.
    """
    F = sol.series
    b = op.shift_base
    shifted_cache: dict = {}
    res = None
    scale = None
    for i, shift, kappa in _residual_pieces(op, sol, ctx):
        if i not in shifted_cache:
            shifted_cache[i] = F.sigma(ctx, b, i)
        piece = (shifted_cache[i] * kappa).shifted(shift)
        mag = piece.map(abs)
        res = piece if res is None else res + piece
        scale = mag if scale is None else scale + mag
    if res is None or not res.coeffs:
        raise TruncationTooShort("no residual coefficient is computable at this truncation")
    return res, scale


def apply(op: QDiffOperator, sol: SolutionObject, ctx: EvalContext) -> FracPowerSeries:
    """Residual ``op(sol)`` with the character/theta prefactor divided out."""
    return apply_with_scale(op, sol, ctx)[0]


def relative_residual(op: QDiffOperator, sol: SolutionObject, ctx: EvalContext) -> float:
    """``max_k |r_k| / scale_k`` over the computable residual coefficients."""
    res, scale = apply_with_scale(op, sol, ctx)
    worst = 0.0
    for r, s in zip(res.coeffs, scale.coeffs):
        if s != 0:
            worst = max(worst, float(abs(r) / s))
    return worst


def pointwise_residual(op: QDiffOperator, f, x, ctx: EvalContext) -> float:
    """``|sum_i a_i(x) f(p^i x)| / sum_i |a_i(x) f(p^i x)|`` with ``p = q^b``."""
    x = ctx.num(x)
    total = ctx.zero
    scale = 0.0
    for i in op.shifts:
        v = op.coeff_value(i, x, ctx) * f(x * ctx.qpow(op.shift_base * i))
        total += v
        scale += float(abs(v))
    return float(abs(total)) / scale if scale else 0.0
