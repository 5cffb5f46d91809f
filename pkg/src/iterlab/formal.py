"""Exact and high-precision formal algebra.

Three layers, all immutable:

* coefficient rings (:data:`QQ`, :class:`RealField`, :class:`PolyRing`),
* :class:`Poly`, a dense univariate polynomial in a named symbol,
* :class:`Series`, a truncated power series in a named variable ``t``
  with an optional ``1/t`` principal term and an optional ``log t`` slot.

Series arithmetic is exact modulo ``O(t**(order+1))``; the truncation order
travels with the value, and binary operations keep the smaller order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any, Sequence

from .errors import DomainError, UsageError
from .precision import Real, real_from_decimal

Rational = Fraction


# ---------------------------------------------------------------------------
# coefficient rings
# ---------------------------------------------------------------------------


class Ring:
    """Contract for coefficient rings. Elements use Python operators."""

    is_exact = True
    zero: Any
    one: Any

    def coerce(self, x):
        raise NotImplementedError

    def invert(self, x):
        raise NotImplementedError

    def div_int(self, x, n: int):
        return x * self.coerce(Fraction(1, n))

    def equal(self, x, y, tol=None) -> bool:
        return x == y

    def is_zero(self, x) -> bool:
        return x == self.zero


class RationalRing(Ring):
    zero = Fraction(0)
    one = Fraction(1)

    def coerce(self, x):
        if isinstance(x, Real):
            raise TypeError("cannot embed an inexact Real into QQ")
        return Fraction(x)

    def invert(self, x):
        if x == 0:
            raise DomainError("0 is not a unit")
        return 1 / Fraction(x)

    def div_int(self, x, n):
        return Fraction(x) / n

    def __repr__(self):
        return "QQ"


QQ = RationalRing()


class RealField(Ring):
    """Reals at a fixed precision; equality needs a caller tolerance to be useful."""

    is_exact = False

    def __init__(self, precision: int):
        self.precision = precision
        self.zero = Real.of(0, precision)
        self.one = Real.of(1, precision)

    def coerce(self, x):
        return Real.of(x, self.precision)

    def invert(self, x):
        x = self.coerce(x)
        if x.is_zero():
            raise DomainError("0 is not a unit")
        return self.one / x

    def div_int(self, x, n):
        return self.coerce(x) / n

    def equal(self, x, y, tol=None):
        if tol is None:
            return self.coerce(x) == self.coerce(y)
        return abs(self.coerce(x) - self.coerce(y)) <= tol

    def __eq__(self, other):
        return isinstance(other, RealField) and other.precision == self.precision

    def __hash__(self):
        return hash(("RealField", self.precision))

    def __repr__(self):
        return f"RealField({self.precision})"


class PolyRing(Ring):
    """Polynomials over ``base`` in ``symbol``; units are the constant units of ``base``."""

    def __init__(self, base: Ring, symbol: str):
        self.base = base
        self.symbol = symbol
        self.is_exact = base.is_exact
        self.zero = Poly(symbol, (), base)
        self.one = Poly(symbol, (base.one,), base)

    def coerce(self, x):
        if isinstance(x, Poly):
            if x.symbol != self.symbol:
                raise UsageError(f"symbol mismatch: {x.symbol} vs {self.symbol}")
            return x
        return Poly(self.symbol, (self.base.coerce(x),), self.base)

    def invert(self, x):
        x = self.coerce(x)
        if x.degree != 0:
            raise DomainError(f"{x} is not a unit of {self!r}")
        return Poly(self.symbol, (self.base.invert(x.coeffs[0]),), self.base)

    def div_int(self, x, n):
        x = self.coerce(x)
        return Poly(self.symbol, tuple(self.base.div_int(c, n) for c in x.coeffs), self.base)

    def equal(self, x, y, tol=None):
        x, y = self.coerce(x), self.coerce(y)
        n = max(len(x.coeffs), len(y.coeffs))
        return all(self.base.equal(x[i], y[i], tol) for i in range(n))

    def is_zero(self, x):
        return self.coerce(x).degree < 0

    def __eq__(self, other):
        return isinstance(other, PolyRing) and (other.base, other.symbol) == (self.base, self.symbol)

    def __hash__(self):
        return hash(("PolyRing", self.symbol))

    def __repr__(self):
        return f"PolyRing({self.base!r}, {self.symbol!r})"


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class Poly:
    """Dense polynomial ``sum(coeffs[i] * symbol**i)``; the zero polynomial has degree -1."""

    symbol: str
    coeffs: tuple
    ring: Ring = field(default=QQ, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.ring.coerce(c) for c in self.coeffs))

    @classmethod
    def from_list(cls, symbol, coeffs, ring=QQ):
        return cls(symbol, tuple(coeffs), ring)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.ring.zero

    def _other(self, other):
        if isinstance(other, Poly):
            if other.symbol != self.symbol:
                raise UsageError(f"symbol mismatch: {self.symbol} vs {other.symbol}")
            return other
        try:
            return Poly(self.symbol, (self.ring.coerce(other),), self.ring)
        except (TypeError, ValueError):
            return NotImplemented

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.symbol, tuple(self[i] + other[i] for i in range(n)), self.ring)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.symbol, tuple(-c for c in self.coeffs), self.ring)

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        if self.degree < 0 or other.degree < 0:
            return Poly(self.symbol, (), self.ring)
        out = [self.ring.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(self.symbol, tuple(out), self.ring)

    __rmul__ = __mul__

    def __truediv__(self, n):
        if isinstance(n, int):
            return Poly(self.symbol, tuple(self.ring.div_int(c, n) for c in self.coeffs), self.ring)
        return self * self.ring.invert(self.ring.coerce(n))

    def __pow__(self, n: int):
        out = Poly(self.symbol, (self.ring.one,), self.ring)
        for _ in range(n):
            out = out * self
        return out

    def __call__(self, x):
        """Horner evaluation; ``x`` may be any value that multiplies with the coefficients."""
        acc = self.ring.zero
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        return Poly(self.symbol, tuple(i * c for i, c in enumerate(self.coeffs) if i > 0), self.ring)

    def map_coeffs(self, fn, ring) -> "Poly":
        return Poly(self.symbol, tuple(fn(c) for c in self.coeffs), ring)

    def __str__(self):
        if self.degree < 0:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else (self.symbol if i == 1 else f"{self.symbol}^{i}")
            terms.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(terms)

    def to_latex(self) -> str:
        return poly_latex(self)

    def to_json(self):
        return {"symbol": self.symbol, "coeffs": [coeff_to_json(c) for c in self.coeffs]}


def coeff_to_json(c):
    """Rationals as ``"num/den"``, reals as decimal strings, polys as nested objects."""
    if isinstance(c, Poly):
        return c.to_json()
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    if isinstance(c, Real):
        return c.to_string()
    if isinstance(c, int):
        return f"{c}/1"
    raise TypeError(f"cannot serialize {type(c).__name__}")


def coeff_from_json(obj, ring: Ring):
    if isinstance(ring, PolyRing):
        return poly_from_json(obj, ring.base)
    if isinstance(ring, RationalRing):
        return Fraction(obj)
    return real_from_decimal(obj, ring.precision)


def poly_from_json(obj, ring: Ring = QQ) -> Poly:
    return Poly(obj["symbol"], tuple(coeff_from_json(c, ring) for c in obj["coeffs"]), ring)


def _latex_number(c: Fraction) -> tuple[str, str]:
    sign = "-" if c < 0 else "+"
    c = abs(c)
    if c.denominator == 1:
        return sign, str(c.numerator)
    return sign, rf"\frac{{{c.numerator}}}{{{c.denominator}}}"


def poly_latex(p: Poly) -> str:
    """LaTeX for a rational polynomial, ascending powers: ``-\\frac{5}{6}+C-C^{2}``."""
    if p.degree < 0:
        return "0"
    parts = []
    for i, c in enumerate(p.coeffs):
        if c == 0:
            continue
        c = Fraction(c)
        sign, mag = _latex_number(c)
        if i == 0:
            body = mag
        else:
            mono = p.symbol if i == 1 else f"{p.symbol}^{{{i}}}"
            body = mono if mag == "1" else mag + mono
        parts.append((sign, body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += sign + body
    return out


# ---------------------------------------------------------------------------
# truncated series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Series:
    """``principal/t + log*log(t) + sum(coeffs[j] * t**j, j=0..order) + O(t**(order+1))``."""

    var: str
    order: int
    coeffs: tuple
    ring: Ring = field(default=QQ, compare=False)
    principal: Any = None
    log: Any = None

    def __post_init__(self):
        if self.order < 0:
            raise DomainError("truncation order must be >= 0")
        r = self.ring
        cs = [r.coerce(c) for c in self.coeffs[: self.order + 1]]
        cs += [r.zero] * (self.order + 1 - len(cs))
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "principal", r.zero if self.principal is None else r.coerce(self.principal))
        object.__setattr__(self, "log", r.zero if self.log is None else r.coerce(self.log))

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_poly(cls, var, coeffs: Sequence, order: int, ring: Ring = QQ):
        return cls(var, order, tuple(coeffs), ring)

    @classmethod
    def constant(cls, var, c, order, ring=QQ):
        return cls(var, order, (c,), ring)

    # -- helpers --------------------------------------------------------------
    def __getitem__(self, j):
        return self.coeffs[j] if 0 <= j <= self.order else self.ring.zero

    @property
    def has_principal(self):
        return not self.ring.is_zero(self.principal)

    @property
    def has_log(self):
        return not self.ring.is_zero(self.log)

    def is_regular(self):
        return not (self.has_principal or self.has_log)

    def regular(self) -> "Series":
        return Series(self.var, self.order, self.coeffs, self.ring)

    def truncate(self, order: int) -> "Series":
        return Series(self.var, min(order, self.order), self.coeffs, self.ring, self.principal, self.log)

    def _check(self, other: "Series"):
        if not isinstance(other, Series):
            raise UsageError("expected a Series")
        if other.var != self.var:
            raise UsageError(f"variable mismatch: {self.var} vs {other.var}")

    def _lift(self, other):
        if isinstance(other, Series):
            self._check(other)
            return other
        return Series(self.var, self.order, (self.ring.coerce(other),), self.ring)

    # -- linear operations --------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        k = min(self.order, other.order)
        return Series(
            self.var,
            k,
            tuple(self[j] + other[j] for j in range(k + 1)),
            self.ring,
            self.principal + other.principal,
            self.log + other.log,
        )

    __radd__ = __add__

    def __neg__(self):
        return Series(self.var, self.order, tuple(-c for c in self.coeffs), self.ring, -self.principal, -self.log)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Series":
        c = self.ring.coerce(c)
        return Series(self.var, self.order, tuple(c * x for x in self.coeffs), self.ring, c * self.principal, c * self.log)

    def __mul__(self, other):
        if isinstance(other, Series):
            return series_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, n: int):
        if n < 0:
            return series_reciprocal(self) ** (-n)
        out = Series.constant(self.var, self.ring.one, self.order, self.ring)
        base = self
        while n:
            if n & 1:
                out = series_mul(out, base)
            n >>= 1
            if n:
                base = series_mul(base, base)
        return out

    def shift(self, k: int) -> "Series":
        """Multiply a regular series by ``t**k`` (k >= 0); order grows by ``k``."""
        if not self.is_regular():
            raise DomainError("shift is defined for regular series only")
        return Series(self.var, self.order + k, (self.ring.zero,) * k + self.coeffs, self.ring)

    def divide_by_var(self) -> "Series":
        """``(s - s[0]) / t``; order drops by one."""
        if not self.is_regular() or self.order < 1:
            raise DomainError("cannot divide by the variable")
        return Series(self.var, self.order - 1, self.coeffs[1:], self.ring)

    def derivative(self) -> "Series":
        if not self.is_regular():
            raise DomainError("derivative is defined for regular series only")
        if self.order == 0:
            return Series(self.var, 0, (), self.ring)
        return Series(self.var, self.order - 1, tuple(j * self.coeffs[j] for j in range(1, self.order + 1)), self.ring)

    def integral(self) -> "Series":
        """Antiderivative with zero constant term; order grows by one."""
        cs = (self.ring.zero,) + tuple(self.ring.div_int(c, j + 1) for j, c in enumerate(self.coeffs))
        return Series(self.var, self.order + 1, cs, self.ring)

    def equals(self, other: "Series", tol=None) -> bool:
        """Equality modulo the common truncation order."""
        self._check(other)
        r = self.ring
        k = min(self.order, other.order)
        return (
            r.equal(self.principal, other.principal, tol)
            and r.equal(self.log, other.log, tol)
            and all(r.equal(self[j], other[j], tol) for j in range(k + 1))
        )

    def evaluate(self, t, log_t=None):
        """Numerically sum the series at ``t`` (``log_t`` needed only if a log slot is present)."""
        acc = self.ring.zero
        for c in reversed(self.coeffs):
            acc = acc * t + c
        if self.has_principal:
            acc = acc + self.principal / t
        if self.has_log:
            if log_t is None:
                raise UsageError("log slot present: supply log_t")
            acc = acc + self.log * log_t
        return acc

    def to_json(self):
        return {
            "var": self.var,
            "order": self.order,
            "coeffs": [coeff_to_json(c) for c in self.coeffs],
            "principal": coeff_to_json(self.principal),
            "log": coeff_to_json(self.log),
        }

    def __str__(self):
        terms = []
        if self.has_principal:
            terms.append(f"({self.principal})/{self.var}")
        if self.has_log:
            terms.append(f"({self.log})*log({self.var})")
        for j, c in enumerate(self.coeffs):
            if not self.ring.is_zero(c):
                terms.append(f"({c})*{self.var}^{j}" if j else f"({c})")
        terms.append(f"O({self.var}^{self.order + 1})")
        return " + ".join(terms)


def series_from_json(obj, ring: Ring = QQ) -> Series:
    return Series(
        obj["var"],
        obj["order"],
        tuple(coeff_from_json(c, ring) for c in obj["coeffs"]),
        ring,
        coeff_from_json(obj["principal"], ring),
        coeff_from_json(obj["log"], ring),
    )


def dumps(obj) -> str:
    """Deterministic JSON for a Poly or Series."""
    return json.dumps(obj.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# series operations
# ---------------------------------------------------------------------------


def series_mul(a: Series, b: Series) -> Series:
    """Truncated Cauchy product.

    A ``1/t`` principal term on one factor lowers the result order by one.
    A log slot is only allowed against a constant factor.
    """
    a._check(b)
    r = a.ring
    if a.has_log or b.has_log:
        other = b if a.has_log else a
        if a.has_log and b.has_log:
            raise DomainError("log * log is not supported")
        if other.has_principal or any(not r.is_zero(c) for c in other.coeffs[1:]):
            raise DomainError("log slot can only be multiplied by a constant")
        owner = a if a.has_log else b
        k = min(a.order, b.order)
        return owner.truncate(k).scale(other[0])
    if a.has_principal and b.has_principal:
        raise DomainError("product of two principal parts leaves the representable range")
    if a.has_principal or b.has_principal:
        p_s, reg = (a, b) if a.has_principal else (b, a)
        c = p_s.principal
        k = min(p_s.order, reg.order - 1)
        if k < 0:
            raise DomainError("not enough terms to absorb the principal part")
        shifted = Series(a.var, k, tuple(c * reg[j + 1] for j in range(k + 1)), r, c * reg[0])
        return shifted + series_mul(p_s.regular().truncate(k), reg.truncate(k + 1))
    k = min(a.order, b.order)
    out = []
    for n in range(k + 1):
        acc = r.zero
        for i in range(n + 1):
            x = a.coeffs[i]
            if r.is_zero(x):
                continue
            acc = acc + x * b.coeffs[n - i]
        out.append(acc)
    return Series(a.var, k, tuple(out), r)


def series_reciprocal(a: Series) -> Series:
    """``1/a`` for a regular series whose constant coefficient is a unit."""
    if not a.is_regular():
        raise DomainError("reciprocal needs a regular series")
    r = a.ring
    inv0 = r.invert(a[0])
    out = [inv0]
    for n in range(1, a.order + 1):
        acc = r.zero
        for i in range(1, n + 1):
            acc = acc + a.coeffs[i] * out[n - i]
        out.append(-(acc * inv0))
    return Series(a.var, a.order, tuple(out), r)


def binomial_expand(k: int, K: int, var: str = "t") -> Series:
    """Exact coefficients of ``(1 + t)**(-k)`` through ``t**K``."""
    if k < 1 or K < 0:
        raise DomainError("need k >= 1 and K >= 0")
    return Series(var, K, tuple(Fraction((-1) ** j * comb(k + j - 1, j)) for j in range(K + 1)), QQ)


def series_log1(u: Series) -> Series:
    """``log(u)`` for a regular series with ``u[0] == 1``, via ``integral(u'/u)``."""
    if not u.is_regular():
        raise DomainError("log needs a regular series")
    if not u.ring.equal(u[0], u.ring.one):
        raise DomainError("log needs constant term 1")
    if u.order == 0:
        return Series(u.var, 0, (), u.ring)
    return series_mul(u.derivative(), series_reciprocal(u.truncate(u.order - 1))).integral()


def series_compose_inner(a: Series, inner: Series) -> Series:
    """``a(inner(t))`` for ``inner = t + O(t**2)`` (zero constant term).

    The ``1/t`` term maps to ``(1/t) * 1/(inner/t)`` and the log slot
    follows ``log(inner) = log(t) + log(inner/t)``. Each of these costs one
    order of ``inner``, so the result order is at most ``inner.order - 2``
    when a principal term is present and ``inner.order - 1`` for the log slot.
    """
    a._check(inner)
    r = a.ring
    if not inner.is_regular():
        raise DomainError("inner series must be regular")
    if not r.is_zero(inner[0]):
        raise DomainError("inner series must have zero constant term")
    if inner.order < 1 or r.is_zero(inner[1]):
        raise DomainError("inner series must have a unit linear term")
    k = min(a.order, inner.order)
    if a.has_principal:
        k = min(k, inner.order - 2)
    if a.has_log:
        k = min(k, inner.order - 1)
    if k < 0:
        raise DomainError("inner series has too few terms")
    # regular part by Horner: ((a_K * g + a_{K-1}) * g + ...) * g + a_0
    g = inner.truncate(k)
    acc = Series(a.var, k, (a[k],), r)
    for j in range(k - 1, -1, -1):
        acc = series_mul(acc, g) + a[j]
    out = acc
    if a.has_principal or a.has_log:
        u = inner.divide_by_var()
    if a.has_principal:
        rec = series_reciprocal(u)
        out = out + Series(a.var, k, tuple(a.principal * rec[j + 1] for j in range(k + 1)), r, a.principal * rec[0])
    if a.has_log:
        if not r.equal(u[0], r.one):
            raise DomainError("log composition needs linear coefficient 1")
        out = out + series_log1(u).truncate(k).scale(a.log) + Series(a.var, k, (), r, None, a.log)
    return out
