"""The translated recurrence ``x_{n+1} = x_n + 1 + 1/x_n**2``.

The orbit satisfies ``x_n = n + C(x0) + o(1)``. This module derives the
full asymptotic expansion ``x_n ~ n + C + sum_k P_k(C) / n**k`` with exact
rational polynomials ``P_k``, solves for ``C`` from one long orbit, and
computes ``C'`` and ``C''`` several independent ways:

* the infinite product ``prod(1 - 2/x_n**3)`` for ``C'``;
* central finite differences of solved ``C`` values;
* forward-mode propagation of ``dx_n/dx0`` and ``d2x_n/dx0**2`` along the
  orbit, corrected for the tail with the derivatives of the expansion;
* the series formula ``C' * sum(6/x_n**4 / (1 - 2/x_n**3))``, which assumes
  an interchange of limits that does not hold. It is kept deliberately and
  flagged ``known_flawed`` in reports.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .errors import DomainError, NumericError, PrecisionError
from .formal import QQ, Poly, PolyRing, Series, binomial_expand, poly_latex, series_mul, series_reciprocal
from .precision import Real, context

DEFAULT_N = 10**6
DEFAULT_ORDER = 13
DEFAULT_DIGITS = 120
DEFAULT_EPS = Decimal("1e-20")
# multiplies the (1/N)**(K+1) envelope when judging |C(N) - C(2N)|
SAFETY_FACTOR = 10**6
NEWTON_MAX_STEPS = 50

_CRING = PolyRing(QQ, "C")


# ---------------------------------------------------------------------------
# exact expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionTable:
    """``x_n ~ n + C + sum(polys[k-1](C) / n**k for k in 1..order)``."""

    order: int
    polys: tuple

    def poly(self, k: int) -> Poly:
        return self.polys[k - 1]

    def truncate(self, order: int) -> "ExpansionTable":
        if order > self.order:
            raise DomainError(f"table only has order {self.order}")
        return ExpansionTable(order, self.polys[:order])

    def to_json(self):
        return {"order": self.order, "P": [p.to_json() for p in self.polys]}

    def to_latex(self) -> str:
        out = r"x_{n}\sim n+C"
        for k, p in enumerate(self.polys, start=1):
            power = r"\frac{1}{n}" if k == 1 else rf"\frac{{1}}{{n^{{{k}}}}}"
            if p.degree == 0:
                c = p.coeffs[0]
                mag = abs(c)
                sign = "-" if c < 0 else "+"
                if mag == 1:
                    out += sign + power
                elif mag.denominator == 1:
                    out += sign + str(mag.numerator) + power
                else:
                    out += sign + rf"\frac{{{mag.numerator}}}{{{mag.denominator}}}" + power
            else:
                out += r"+\left(" + poly_latex(p) + r"\right)" + power
        return out


def _shift_residual(polys, order: int) -> Series:
    """``x_{n+1} - x_n - 1 - 1/x_n**2`` as a series in ``t = 1/n`` for the given P's."""
    var = "t"
    r = _CRING
    lhs = Series(var, order, (), r)
    for j, p in enumerate(polys, start=1):
        if j > order:
            break
        # P_j t^j ((1+t)^-j - 1)
        b = binomial_expand(j, order - j, var)
        diff = Series(var, order - j, (0,) + b.coeffs[1:], r)
        lhs = lhs + diff.scale(p).shift(j)
    # x_n = (1/t) * w with w = 1 + C t + sum P_j t^(j+1)
    w = [r.one, Poly("C", (0, 1))] + list(polys)
    w = Series(var, max(order - 2, 0), tuple(w), r)
    inv = series_reciprocal(w)
    rhs = series_mul(inv, inv).shift(2).truncate(order)
    return lhs - rhs


@lru_cache(maxsize=8)
def derive_expansion(K: int) -> ExpansionTable:
    """Match powers of ``1/n`` order by order; ``P_k`` enters at ``n**-(k+1)`` as ``-k*P_k``."""
    if K < 1:
        raise DomainError("order must be >= 1")
    polys = []
    for k in range(1, K + 1):
        res = _shift_residual(polys, k + 1)
        for j in range(k + 1):
            if not _CRING.is_zero(res[j]):
                raise NumericError(f"expansion residual nonzero at order {j} while solving P_{k}")
        polys.append(res[k + 1] / k)
    return ExpansionTable(K, tuple(polys))


def expansion_residual(table: ExpansionTable) -> Series:
    """Residual series of the recurrence; vanishes through ``t**(order+1)``."""
    return _shift_residual(list(table.polys), table.order + 1)


# ---------------------------------------------------------------------------
# orbit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitPass:
    """Quantities accumulated along one orbit of length N (all Decimals at ``precision``)."""

    x0: Decimal
    N: int
    precision: int
    x_N: Decimal
    naive_sum: Optional[Decimal] = None  # x0 + sum 1/x_n^2
    t_N: Optional[Decimal] = None  # prod (1 - 2/x_n^3)
    h_N: Optional[Decimal] = None  # second derivative of x_N
    flawed_sum: Optional[Decimal] = None  # sum (6/x_n^4) / (1 - 2/x_n^3)


def _as_decimal(x, p) -> Decimal:
    return Real.of(x, p).value


def _orbit(x0, N: int, p: int, derivatives: bool = False) -> OrbitPass:
    ctx = context(p)
    add, mul, div, sub = ctx.add, ctx.multiply, ctx.divide, ctx.subtract
    one, two, six = Decimal(1), Decimal(2), Decimal(6)
    x = _as_decimal(x0, p)
    start = x
    if not derivatives:
        for _ in range(N):
            inv = div(one, x)
            x = add(add(x, one), mul(inv, inv))
        return OrbitPass(start, N, p, x)
    s = x
    t, h, fl = one, Decimal(0), Decimal(0)
    for _ in range(N):
        inv = div(one, x)
        inv2 = mul(inv, inv)
        inv3 = mul(inv2, inv)
        q = sub(one, mul(two, inv3))
        if q <= 0:
            raise DomainError("orbit entered x <= 2**(1/3); derivative factor not positive")
        r = mul(six, mul(inv3, inv))
        h = add(mul(h, q), mul(mul(t, t), r))
        t = mul(t, q)
        fl = add(fl, div(r, q))
        s = add(s, inv2)
        x = add(add(x, one), inv2)
    return OrbitPass(start, N, p, x, s, t, h, fl)


def iterate(x0, N: int, p: int = DEFAULT_DIGITS) -> Real:
    """``x_N`` by straight recursion at ``p`` digits (the step map contracts, so errors do not grow)."""
    if N < 0:
        raise DomainError("N must be >= 0")
    if Real.of(x0, p) < 1:
        raise DomainError("x0 must be >= 1")
    return Real(_orbit(x0, N, p).x_N, p)


def naive_series_C(x0, N: int, p: int = 50) -> Real:
    """Partial sum ``x0 + sum_{n<N} 1/x_n**2``; the tail is about ``1/N``."""
    if N < 1:
        raise DomainError("N must be >= 1")
    return Real(_orbit(x0, N, p, derivatives=True).naive_sum, p)


def derivative_product(x0, N: int, p: int = 50) -> Real:
    """Partial product ``prod_{n<N} (1 - 2/x_n**3)`` approximating ``C'``; tail about ``1/N**2``."""
    if N < 1:
        raise DomainError("N must be >= 1")
    return Real(_orbit(x0, N, p, derivatives=True).t_N, p)


def flawed_second_series(x0, N: int, p: int = 50) -> Real:
    """The interchange-of-limits formula for ``C''``. Known to be wrong; kept for comparison."""
    if N < 1:
        raise DomainError("N must be >= 1")
    o = _orbit(x0, N, p, derivatives=True)
    return Real(context(p).multiply(o.t_N, o.flawed_sum), p)


def forward_derivatives(x0, N: int, p: int = 50) -> tuple[Real, Real]:
    """Raw forward-mode ``(dx_N/dx0, d2x_N/dx0**2)``.

    These converge to ``(C', C'')`` with tails of relative size ``1/N**2``;
    :func:`forward_corrected` removes the tail using the expansion.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    o = _orbit(x0, N, p, derivatives=True)
    return Real(o.t_N, p), Real(o.h_N, p)


# ---------------------------------------------------------------------------
# solving for C
# ---------------------------------------------------------------------------


def _decimal_table(table: ExpansionTable, p: int):
    ctx = context(p)
    return [
        [ctx.divide(Decimal(c.numerator), Decimal(c.denominator)) for c in poly.coeffs]
        for poly in table.polys
    ]


def _tail(dtable, C: Decimal, N: int, p: int):
    """``S = sum P_k(C)/N^k`` with ``dS/dC`` and ``d2S/dC2``."""
    ctx = context(p)
    add, mul = ctx.add, ctx.multiply
    t = ctx.divide(Decimal(1), Decimal(N))
    S = dS = d2S = Decimal(0)
    for coeffs in reversed(dtable):
        v = d1 = d2 = Decimal(0)
        for c in reversed(coeffs):
            d2 = add(mul(d2, C), mul(2, d1))
            d1 = add(mul(d1, C), v)
            v = add(mul(v, C), c)
        S = mul(add(S, v), t)
        dS = mul(add(dS, d1), t)
        d2S = mul(add(d2S, d2), t)
    return S, dS, d2S


def _newton_C(x_N: Decimal, N: int, dtable, p: int) -> Decimal:
    ctx = context(p)
    Nd = Decimal(N)
    C = ctx.subtract(x_N, Nd)
    stop = Decimal((0, (1,), -(p - 5)))
    for _ in range(NEWTON_MAX_STEPS):
        S, dS, _ = _tail(dtable, C, N, p)
        g = ctx.subtract(ctx.add(ctx.add(Nd, C), S), x_N)
        step = ctx.divide(g, ctx.add(Decimal(1), dS))
        C = ctx.subtract(C, step)
        if ctx.abs(step) <= ctx.multiply(stop, max(ctx.abs(C), Decimal(1))):
            return C
    raise NumericError("Newton iteration for C did not converge in 50 steps")


@dataclass(frozen=True)
class CResult:
    x0: Real
    N: int
    K: int
    C: Real
    x_N: Real
    delta_2N: Optional[Real] = None
    error_bound: Optional[Real] = None

    def to_json(self):
        return {
            "x0": self.x0.to_plain(),
            "N": self.N,
            "K": self.K,
            "precision": self.C.precision,
            "C": self.C.to_plain(),
            "x_N": self.x_N.to_plain(),
            "delta_2N": None if self.delta_2N is None else self.delta_2N.to_string(),
            "error_bound": None if self.error_bound is None else self.error_bound.to_string(),
        }


def _check_solve_args(N, K, p, table):
    if N < 1:
        raise DomainError("N must be >= 1")
    if K > table.order:
        raise DomainError(f"order {K} exceeds the table order {table.order}")


def solve_C(x0, N: int = DEFAULT_N, K: int = DEFAULT_ORDER, p: int = DEFAULT_DIGITS,
            table: Optional[ExpansionTable] = None, check: bool = True) -> CResult:
    """Iterate to ``x_N`` and Newton-solve ``x_N = N + C + sum P_k(C)/N**k`` for ``C``.

    With ``check`` the orbit continues to ``2N`` and the two solved values are
    compared; a gap beyond ``SAFETY_FACTOR * (1/N)**(K+1)`` raises.
    """
    table = table or derive_expansion(K)
    _check_solve_args(N, K, p, table)
    dtable = _decimal_table(table.truncate(K), p)
    first = _orbit(x0, N, p)
    C = _newton_C(first.x_N, N, dtable, p)
    delta = bound = None
    if check:
        second = _orbit(first.x_N, N, p)
        C2 = _newton_C(second.x_N, 2 * N, dtable, p)
        delta = Real(context(p).subtract(C, C2), p)
        bound = Real.of(Fraction(1, N ** (K + 1)), p)
        if abs(delta) > bound * SAFETY_FACTOR:
            raise PrecisionError(f"C(N) and C(2N) differ by {delta}; raise N, K or precision")
    return CResult(Real.of(x0, p), N, K, Real(C, p), Real(first.x_N, p), delta, bound)


def forward_corrected(orbit: OrbitPass, C: Decimal, dtable, p: int) -> tuple[Decimal, Decimal]:
    """Solve ``t_N = G*C'`` and ``h_N = S''*C'^2 + G*C''`` with ``G = 1 + dS/dC``."""
    ctx = context(p)
    _, dS, d2S = _tail(dtable, C, orbit.N, p)
    G = ctx.add(Decimal(1), dS)
    c1 = ctx.divide(orbit.t_N, G)
    c2 = ctx.divide(ctx.subtract(orbit.h_N, ctx.multiply(d2S, ctx.multiply(c1, c1))), G)
    return c1, c2


def _fd_precision_check(eps: Decimal, N: int, K: int, p: int, target: int = 20):
    e = -eps.adjusted()
    need = 2 * e + target + 20
    if p < need:
        raise PrecisionError(f"precision {p} too small for eps=1e-{e}; need >= {need}", need)
    if Fraction(1, N ** (K + 1)) > Fraction(1, 10 ** (2 * e + target)):
        raise PrecisionError(f"series error (1/N)^{K + 1} too large for eps=1e-{e}; raise N or K", need)


def _solve_only(args):
    x0, N, K, p, table = args
    return solve_C(x0, N, K, p, table, check=False).C.value


def finite_difference(x0, eps=DEFAULT_EPS, N: int = DEFAULT_N, K: int = DEFAULT_ORDER,
                      p: int = DEFAULT_DIGITS, table: Optional[ExpansionTable] = None,
                      workers: int = 1, center: Optional[Decimal] = None) -> tuple[Real, Real]:
    """Central differences ``(C(x0+e)-C(x0-e))/2e`` and ``(C(x0+e)-2C(x0)+C(x0-e))/e**2``."""
    table = table or derive_expansion(K)
    eps = context(p).abs(_as_decimal(eps, p))
    _fd_precision_check(eps, N, K, p)
    ctx = context(p)
    x = _as_decimal(x0, p)
    points = [ctx.add(x, eps), ctx.subtract(x, eps)]
    if center is None:
        points.append(x)
    jobs = [(pt, N, K, p, table) for pt in points]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_solve_only, jobs))
    else:
        values = [_solve_only(j) for j in jobs]
    c_plus, c_minus = values[0], values[1]
    c_mid = center if center is not None else values[2]
    d1 = ctx.divide(ctx.subtract(c_plus, c_minus), ctx.multiply(2, eps))
    d2 = ctx.divide(ctx.add(ctx.subtract(c_plus, ctx.multiply(2, c_mid)), c_minus), ctx.multiply(eps, eps))
    return Real(d1, p), Real(d2, p)


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------

ALL_DERIVATIVES = ("fd", "forward", "product", "series")


@dataclass(frozen=True)
class DerivativeReport:
    x0: Real
    N: int
    K: int
    precision: int
    C: Real
    values: dict = field(default_factory=dict)

    def get(self, key) -> Optional[Real]:
        return self.values.get(key)

    def deltas(self) -> dict:
        pairs = [
            ("C1_product-C1_fd", "C1_product", "C1_fd"),
            ("C1_forward-C1_fd", "C1_forward", "C1_fd"),
            ("C2_forward-C2_fd", "C2_forward", "C2_fd"),
            ("C2_forward_raw-C2_fd", "C2_forward_raw", "C2_fd"),
            ("C2_flawed_series-C2_fd", "C2_flawed_series", "C2_fd"),
        ]
        out = {}
        for name, a, b in pairs:
            if a in self.values and b in self.values:
                out[name] = (self.values[a] - self.values[b]).to_string()
        return out

    def to_json(self):
        d = {
            "x0": self.x0.to_plain(),
            "N": self.N,
            "K": self.K,
            "precision": self.precision,
            "C": self.C.to_plain(),
        }
        for key in ("C1_product", "C1_fd", "C1_forward", "C1_forward_raw",
                    "C2_fd", "C2_forward", "C2_forward_raw", "C2_flawed_series", "C_naive"):
            if key in self.values:
                d[key] = self.values[key].to_plain()
        if "C2_flawed_series" in self.values:
            d["C2_flawed_series_status"] = "known_flawed"
        d["deltas"] = self.deltas()
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def derivative_report(x0, N: int = DEFAULT_N, K: int = DEFAULT_ORDER, p: int = DEFAULT_DIGITS,
                      derivatives=ALL_DERIVATIVES, eps=DEFAULT_EPS, workers: int = 1) -> DerivativeReport:
    """C and every requested derivative estimate from as few orbit passes as possible."""
    unknown = set(derivatives) - set(ALL_DERIVATIVES)
    if unknown:
        raise DomainError(f"unknown derivative methods: {sorted(unknown)}")
    table = derive_expansion(max(K, 1))
    _check_solve_args(N, K, p, table)
    if "fd" in derivatives:
        _fd_precision_check(context(p).abs(_as_decimal(eps, p)), N, K, p)
    dtable = _decimal_table(table.truncate(K), p)
    need_orbit_derivs = bool({"forward", "product", "series"} & set(derivatives))
    orbit = _orbit(x0, N, p, derivatives=need_orbit_derivs)
    C = _newton_C(orbit.x_N, N, dtable, p)
    vals = {}
    if need_orbit_derivs:
        vals["C_naive"] = Real(orbit.naive_sum, p)
    if "product" in derivatives:
        vals["C1_product"] = Real(orbit.t_N, p)
    if "forward" in derivatives:
        c1, c2 = forward_corrected(orbit, C, dtable, p)
        vals["C1_forward"] = Real(c1, p)
        vals["C2_forward"] = Real(c2, p)
        vals["C1_forward_raw"] = Real(orbit.t_N, p)
        vals["C2_forward_raw"] = Real(orbit.h_N, p)
    if "series" in derivatives:
        vals["C2_flawed_series"] = Real(context(p).multiply(orbit.t_N, orbit.flawed_sum), p)
    if "fd" in derivatives:
        d1, d2 = finite_difference(x0, eps, N, K, p, table, workers=workers, center=C)
        vals["C1_fd"] = d1
        vals["C2_fd"] = d2
    return DerivativeReport(Real.of(x0, p), N, K, p, Real(C, p), vals)
