"""Arbitrary-precision reals with explicit decimal working precision.

Every :class:`Real` carries its own precision (in significant decimal
digits). Operations never consult a global or thread-local context: each
one builds a :class:`decimal.Context` from the precision of its operands,
so results are reproducible regardless of caller state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import (
    Context,
    Decimal,
    DivisionByZero,
    InvalidOperation,
    Overflow,
    ROUND_HALF_EVEN,
)
from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC

from .errors import DomainError, ParseError

MIN_PRECISION = 10

_DECIMAL_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@lru_cache(maxsize=None)
def context(precision: int) -> Context:
    """Return the (cached, never mutated) decimal context for ``precision`` digits."""
    if precision < MIN_PRECISION:
        raise DomainError(f"precision must be >= {MIN_PRECISION}, got {precision}")
    return Context(
        prec=precision,
        rounding=ROUND_HALF_EVEN,
        Emax=10**9,
        Emin=-(10**9),
        traps=[InvalidOperation, DivisionByZero, Overflow],
    )


def _coerce(x, precision: int) -> Decimal:
    if isinstance(x, Real):
        return x.value
    if isinstance(x, int):
        return Decimal(x)
    if isinstance(x, _RationalABC):
        return context(precision).divide(Decimal(x.numerator), Decimal(x.denominator))
    if isinstance(x, Decimal):
        return x
    if isinstance(x, str):
        return real_from_decimal(x, precision).value
    raise TypeError(f"cannot convert {type(x).__name__} to Real")


@dataclass(frozen=True)
class Real:
    """Immutable decimal real number at a fixed working precision."""

    value: Decimal
    precision: int

    def __post_init__(self):
        if self.precision < MIN_PRECISION:
            raise DomainError(f"precision must be >= {MIN_PRECISION}")

    # -- construction -----------------------------------------------------
    @classmethod
    def of(cls, x, precision: int) -> "Real":
        """Embed an int, Fraction, Decimal, str or Real at ``precision`` digits."""
        if isinstance(x, Real):
            return x.with_precision(precision)
        ctx = context(precision)
        return cls(ctx.plus(_coerce(x, precision)), precision)

    def with_precision(self, precision: int) -> "Real":
        return Real(context(precision).plus(self.value), precision)

    # -- arithmetic -------------------------------------------------------
    def _binary(self, other, op, reflected=False):
        if isinstance(other, Real):
            p = max(self.precision, other.precision)
            b = other.value
        else:
            p = self.precision
            try:
                b = _coerce(other, p)
            except TypeError:
                return NotImplemented
        a = self.value
        if reflected:
            a, b = b, a
        return Real(arith_decimal(op, a, b, p), p)

    def __add__(self, other):
        return self._binary(other, "add")

    def __radd__(self, other):
        return self._binary(other, "add", reflected=True)

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return self._binary(other, "sub", reflected=True)

    def __mul__(self, other):
        return self._binary(other, "mul")

    def __rmul__(self, other):
        return self._binary(other, "mul", reflected=True)

    def __truediv__(self, other):
        return self._binary(other, "div")

    def __rtruediv__(self, other):
        return self._binary(other, "div", reflected=True)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        ctx = context(self.precision)
        if n < 0:
            if self.value == 0:
                raise DomainError("division by zero")
            return Real(ctx.divide(1, ctx.power(self.value, -n)), self.precision)
        return Real(ctx.power(self.value, n), self.precision)

    def __neg__(self):
        return Real(context(self.precision).minus(self.value), self.precision)

    def __pos__(self):
        return self

    def __abs__(self):
        return Real(context(self.precision).abs(self.value), self.precision)

    # -- comparison: exact on the stored digits ---------------------------
    def _cmp_value(self, other):
        if isinstance(other, Real):
            return other.value
        if isinstance(other, (int, Decimal)):
            return Decimal(other)
        if isinstance(other, _RationalABC):
            return Fraction(other)
        return NotImplemented

    def __eq__(self, other):
        v = self._cmp_value(other)
        if v is NotImplemented:
            return NotImplemented
        return self.value == v

    def __hash__(self):
        return hash(self.value)

    def __lt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value < v

    def __le__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value <= v

    def __gt__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value > v

    def __ge__(self, other):
        v = self._cmp_value(other)
        return NotImplemented if v is NotImplemented else self.value >= v

    # -- conversion -------------------------------------------------------
    def __float__(self):
        return float(self.value)

    def sign(self) -> int:
        return (self.value > 0) - (self.value < 0)

    def is_zero(self) -> bool:
        return self.value == 0

    def to_string(self) -> str:
        """Scientific rendering ``[-]d.ddd...E[+-]n`` with every stored digit."""
        return format(self.value, "E")

    def to_plain(self) -> str:
        """Positional rendering with every stored digit (used in reports)."""
        return format(self.value, "f")

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"Real('{self.to_string()}', {self.precision})"


def real_from_decimal(s: str, p: int) -> Real:
    """Parse a signed decimal string, correctly rounded to ``p`` digits."""
    if not isinstance(s, str) or not _DECIMAL_RE.match(s.strip()):
        raise ParseError(f"malformed decimal string: {s!r}")
    ctx = context(p)
    return Real(ctx.plus(Decimal(s.strip())), p)


def arith_decimal(op: str, a: Decimal, b: Decimal, p: int) -> Decimal:
    ctx = context(p)
    if op == "add":
        return ctx.add(a, b)
    if op == "sub":
        return ctx.subtract(a, b)
    if op == "mul":
        return ctx.multiply(a, b)
    if op == "div":
        if b == 0:
            raise DomainError("division by zero")
        return ctx.divide(a, b)
    raise ValueError(f"unknown operation {op!r}")


def arith(op: str, a: Real, b: Real) -> Real:
    """Correctly rounded ``add``/``sub``/``mul``/``div`` at the larger operand precision."""
    p = max(a.precision, b.precision)
    return Real(arith_decimal(op, a.value, b.value, p), p)


def unary(op: str, a: Real) -> Real:
    """Correctly rounded ``sqrt``, ``ln`` or ``exp``."""
    ctx = context(a.precision)
    if op == "sqrt":
        if a.value < 0:
            raise DomainError("sqrt of a negative number")
        return Real(ctx.sqrt(a.value), a.precision)
    if op == "ln":
        if a.value <= 0:
            raise DomainError("ln of a nonpositive number")
        return Real(ctx.ln(a.value), a.precision)
    if op == "exp":
        return Real(ctx.exp(a.value), a.precision)
    raise ValueError(f"unknown operation {op!r}")


def sqrt(a: Real) -> Real:
    return unary("sqrt", a)


def ln(a: Real) -> Real:
    return unary("ln", a)


def exp(a: Real) -> Real:
    return unary("exp", a)


def pow10(e: int, p: int) -> Real:
    """10**e as a Real (exact)."""
    return Real(Decimal((0, (1,), e)), p)

