"""Principal Abel functions of the cubic family ``f_a(x) = x - a*x**2 + x**3``.

For ``1 <= a <= 2`` the map sends ``[0, a]`` into itself with a parabolic
fixed point at 0, so ``F_a(f_a(x)) = F_a(x) + 1`` has a solution with the
asymptotic form

    A(y) = 1/(a*y) + c*log(y) + d_1*y + d_2*y**2 + ...

near 0, with ``c = (a**2 - 1)/a**2``. Solutions differ by an additive
constant; two normalizations are offered:

* ``"normal_form"`` (default): zero constant term in the rescaled variable
  ``a*y``, where the map reads ``z - z**2 + z**3/a**2``. In ``y`` this puts
  ``c*log(a)`` in the constant slot. This is the customary choice.
* ``"zero_constant"``: zero constant term in ``y`` itself.

``F_a(x)`` is evaluated by pushing ``x`` towards 0 with ``f_a`` and reading
off ``A(x_n) - n``.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Optional

from .errors import BudgetError, DomainError, NumericError
from .formal import RealField, Series, series_compose_inner
from .precision import Real, context, ln, pow10, sqrt

ITERATION_CAP = 10**6
GUARD_DIGITS = 10
NORMALIZATIONS = ("normal_form", "zero_constant")


def parse_parameter(a, p: int) -> Real:
    """Accept ``Real``, ints, Fractions, ``"9/5"``, ``"1.9"`` and ``"sqrt(3)"``."""
    if isinstance(a, str):
        s = a.strip().replace(" ", "")
        if s.startswith("sqrt(") and s.endswith(")"):
            return sqrt(parse_parameter(s[5:-1], p))
        if "/" in s:
            return Real.of(Fraction(s), p)
        return Real.of(s, p)
    return Real.of(a, p)


@dataclass(frozen=True)
class CubicFamily:
    a: Real
    precision: int

    @classmethod
    def of(cls, a, precision: int = 50) -> "CubicFamily":
        a = parse_parameter(a, precision)
        if a < 1 or a > 2:
            raise DomainError(f"parameter a must lie in [1, 2], got {a}")
        return cls(a, precision)

    def f(self, x: Real) -> Real:
        x = Real.of(x, self.precision)
        return x * (1 - self.a * x + x * x)

    def df(self, x: Real) -> Real:
        x = Real.of(x, self.precision)
        return 1 - 2 * self.a * x + 3 * x * x

    @property
    def tiny(self) -> Real:
        """Hit-detection width ``10**(5-p)``."""
        return pow10(5 - self.precision, self.precision)


@dataclass(frozen=True)
class AbelSeries:
    """``A(y) = leading/y + log_coeff*log(y) + constant + sum(regular[j-1] * y**j)``.

    ``l_degrees[j-1]`` is the degree in ``L = log(y)`` that the matching
    needed for ``d_j``; every entry is 0 for this family (the log slot
    cancels identically in the residual, so no ``L`` terms are forced).
    """

    a: Real
    order: int
    leading: Real
    log_coeff: Real
    regular: tuple
    l_degrees: tuple
    precision: int
    constant: Real = None
    normalization: str = "normal_form"

    def evaluate(self, y: Real) -> Real:
        ctx = context(self.precision)
        yv = Real.of(y, self.precision).value
        acc = Decimal(0)
        for d in reversed(self.regular):
            acc = ctx.multiply(ctx.add(acc, d.value), yv)
        acc = ctx.add(acc, ctx.divide(self.leading.value, yv))
        acc = ctx.add(acc, ctx.multiply(self.log_coeff.value, ctx.ln(yv)))
        acc = ctx.add(acc, self.constant.value)
        return Real(acc, self.precision)

    def truncation_estimate(self, y: Real) -> Real:
        """Size of the first omitted term, extrapolated from the last two coefficients."""
        dk = abs(self.regular[-1])
        growth = dk / abs(self.regular[-2]) if len(self.regular) > 1 and not self.regular[-2].is_zero() else Real.of(1, self.precision)
        scale = max(dk * growth, dk, Real.of(1, self.precision))
        return scale * abs(y) ** (self.order + 1)

    def to_json(self):
        return {
            "a": self.a.to_plain(),
            "order": self.order,
            "leading": self.leading.to_string(),
            "log": self.log_coeff.to_string(),
            "constant": self.constant.to_string(),
            "normalization": self.normalization,
            "regular": [d.to_string() for d in self.regular],
            "l_degrees": list(self.l_degrees),
        }


def _abel_residual_basis(a: Real, K: int, ring: RealField):
    """Compositions ``b(f_a(y)) - b(y)`` for b in (1/y, log y, y, y**2, ..., y**K)."""
    inner = Series("y", K + 3, (0, 1, -a, 1), ring)
    g = inner.truncate(K + 1)
    principal = series_compose_inner(Series("y", K + 1, (), ring, ring.one), inner)
    principal = principal - Series("y", K + 1, (), ring, ring.one)
    log = series_compose_inner(Series("y", K + 1, (), ring, None, ring.one), inner)
    log = log - Series("y", K + 1, (), ring, None, ring.one)
    basis = [principal.truncate(K + 1), log.truncate(K + 1)]
    power = g
    for j in range(1, K + 1):
        e = Series("y", K + 1, (0,) * j + (1,), ring)
        basis.append(power - e)
        power = power * g
    return basis


def derive_abel_series(a, K: int = 16, p: int = 50, normalization: str = "normal_form") -> AbelSeries:
    """Order-by-order matching of ``A(f_a(y)) = A(y) + 1``.

    Unknowns are solved in the sequence leading (order y^0), log (y^1),
    d_j (y^(j+1)); each enters its order linearly with a nonzero slope.
    The constant term is free and set by ``normalization``.
    """
    if K < 1:
        raise DomainError("order must be >= 1")
    if normalization not in NORMALIZATIONS:
        raise DomainError(f"normalization must be one of {NORMALIZATIONS}")
    wp = p + GUARD_DIGITS
    a_w = parse_parameter(a, wp) if not isinstance(a, Real) else a.with_precision(wp)
    if a_w < 1 or a_w > 2:
        raise DomainError("parameter a must lie in [1, 2]")
    ring = RealField(wp)
    basis = _abel_residual_basis(a_w, K, ring)
    tol = pow10(-(wp - GUARD_DIGITS // 2), wp)
    coeffs = [ring.zero] * len(basis)

    def residual_coeff(order):
        acc = ring.zero if order else -ring.one
        for c, b in zip(coeffs, basis):
            if not c.is_zero():
                acc = acc + c * b[order]
        return acc

    for idx in range(len(basis)):
        order = idx
        slope = basis[idx][order]
        if abs(slope) <= tol:
            raise NumericError(f"singular linear solve at order y^{order}: the ansatz basis must grow")
        coeffs[idx] = -residual_coeff(order) / slope
    for order in range(len(basis)):
        r = residual_coeff(order)
        if abs(r) > tol * max(1, *(abs(c) for c in coeffs)):
            raise NumericError(f"residual {r} at order y^{order} after matching")
    out = [c.with_precision(p) for c in coeffs]
    if normalization == "normal_form":
        constant = (coeffs[1] * ln(a_w)).with_precision(p)
    else:
        constant = Real.of(0, p)
    return AbelSeries(
        a=a_w.with_precision(p),
        order=K,
        leading=out[0],
        log_coeff=out[1],
        regular=tuple(out[2:]),
        l_degrees=(0,) * K,
        precision=p,
        constant=constant,
        normalization=normalization,
    )


def abel_residual_series(series: AbelSeries) -> Series:
    """``A(f_a(y)) - A(y) - 1`` through ``y**(order+1)`` (should vanish)."""
    ring = RealField(series.precision)
    basis = _abel_residual_basis(series.a, series.order, ring)
    coeffs = (series.leading, series.log_coeff) + series.regular
    out = Series("y", series.order + 1, (-ring.one,), ring)
    for c, b in zip(coeffs, basis):
        out = out + b.scale(c)
    return out


class AsymptoteHit(NumericError):
    """The orbit landed on 0 (or on the preimage chain of 1 when a=2)."""


def F_eval(family: CubicFamily, x, series: AbelSeries, tol=None) -> Real:
    """Principal Abel function ``F_a(x)`` for ``0 < x < a``.

    Iterates ``x_n = f_a(x_n-1)`` until ``x_n < min(1e-3, tol**(1/(K+1)))``
    and the estimated truncation error is below ``tol``, then returns
    ``A(x_n) - n``. One extra step must reproduce the value within ``tol``.
    """
    p = family.precision
    if tol is None:
        tol = pow10(-(p - 10), p)
    tol = Real.of(tol, p)
    x = Real.of(x, p)
    if not (0 < x < family.a):
        raise DomainError(f"x must lie in (0, a), got {x}")
    K = series.order
    threshold = min(Real.of("1e-3", p), Real.of(context(p).power(tol.value, context(p).divide(1, K + 1)), p))
    ctx = context(p)
    av = family.a.value
    one = Decimal(1)
    tiny = family.tiny.value
    xv = x.value
    n = 0
    near_unit = family.a == 2

    def step(v):
        return ctx.multiply(v, ctx.add(ctx.subtract(one, ctx.multiply(av, v)), ctx.multiply(v, v)))

    while True:
        if xv <= tiny:
            raise AsymptoteHit(f"orbit of {x} reached 0 after {n} steps")
        if near_unit and ctx.abs(ctx.subtract(xv, one)) <= tiny:
            raise AsymptoteHit(f"orbit of {x} hit the preimage chain of 1 after {n} steps")
        if xv < threshold.value and series.truncation_estimate(Real(xv, p)) < tol:
            break
        xv = step(xv)
        n += 1
        if n > ITERATION_CAP:
            raise BudgetError(f"F_eval exceeded {ITERATION_CAP} iterations")
    value = series.evaluate(Real(xv, p)) - n
    check = series.evaluate(Real(step(xv), p)) - (n + 1)
    if abs(value - check) > tol:
        raise NumericError(f"F value not stable under one extra step: {value} vs {check}")
    return value


def critical_pair(a) -> tuple[Real, Real]:
    """Roots ``(a -/+ sqrt(a^2-3))/3`` of ``f_a'(x) = 1 - 2ax + 3x^2``."""
    if not isinstance(a, Real):
        a = parse_parameter(a, 50)
    p = a.precision
    disc = a * a - 3
    if abs(disc) <= pow10(5 - p, p):
        x = a / 3
        return x, x
    if disc < 0:
        raise DomainError("no critical points: a < sqrt(3)")
    r = sqrt(disc)
    return (a - r) / 3, (a + r) / 3


def _branch_floor(family: CubicFamily) -> Real:
    disc = family.a * family.a - 3
    if disc <= pow10(5 - family.precision, family.precision):
        return Real.of(0, family.precision)
    return critical_pair(family.a)[1]


def inverse_branch(family: CubicFamily, t) -> Real:
    """The preimage of ``t`` on the increasing branch ending at the fixed point ``a``."""
    p = family.precision
    t = Real.of(t, p)
    lo = _branch_floor(family)
    hi = family.a
    f_lo = family.f(lo)
    if not (f_lo < t < hi):
        raise DomainError(f"t={t} outside the branch range ({f_lo}, {hi})")
    # bisection to ~1e-15 relative, then Newton to full precision
    for _ in range(55):
        mid = (lo + hi) / 2
        if family.f(mid) < t:
            lo = mid
        else:
            hi = mid
    x = (lo + hi) / 2
    stop = pow10(5 - p, p)
    for _ in range(100):
        step = (family.f(x) - t) / family.df(x)
        x = x - step
        if abs(step) <= stop:
            return x
    raise NumericError("Newton polish did not converge")


@dataclass(frozen=True)
class CriticalChain:
    a: Real
    xi: tuple
    eta: tuple
    F_xi: tuple
    F_eta: Optional[tuple]
    is_asymptote_chain: bool
    kinds: tuple = ()

    def to_json(self):
        return {
            "a": self.a.to_plain(),
            "xi": [x.to_plain() for x in self.xi],
            "eta": [x.to_plain() for x in self.eta],
            "F_xi": [x.to_plain() for x in self.F_xi],
            "F_eta": None if self.F_eta is None else [x.to_plain() for x in self.F_eta],
            "asymptote_chain": self.is_asymptote_chain,
            "xi_kind": list(self.kinds),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def classify_critical_point(family: CubicFamily, x, series: AbelSeries, h="1e-4") -> str:
    """``min``, ``max`` or ``flat`` from the signs of sampled neighbour differences."""
    x = Real.of(x, family.precision)
    h = Real.of(h, family.precision)
    c = F_eval(family, x, series)
    left = F_eval(family, x - h, series) - c
    right = F_eval(family, x + h, series) - c
    if left > 0 and right > 0:
        return "min"
    if left < 0 and right < 0:
        return "max"
    return "flat"


def _chain(family, start, k_max):
    out = [start]
    for _ in range(k_max):
        out.append(inverse_branch(family, out[-1]))
    return tuple(out)


def critical_chain(family: CubicFamily, k_max: int, series: AbelSeries, classify: bool = False) -> CriticalChain:
    """Preimage chains of the two critical points with their F values.

    For ``a = 2`` the eta chain starts at 1, which maps straight to the fixed
    point; those points are vertical asymptotes and carry no F values.
    """
    xi0, eta0 = critical_pair(family.a)
    xi = _chain(family, xi0, k_max)
    eta = _chain(family, eta0, k_max)
    F_xi = tuple(F_eval(family, x, series) for x in xi)
    asymptote = family.a == 2
    if asymptote:
        F_eta = None
    elif xi0 == eta0:
        F_eta = F_xi
    else:
        F_eta = tuple(F_eval(family, x, series) for x in eta)
    kinds = tuple(classify_critical_point(family, x, series) for x in xi) if classify else ()
    return CriticalChain(family.a, xi, eta, F_xi, F_eta, asymptote, kinds)


@dataclass(frozen=True)
class GraphSample:
    a: Real
    rows: tuple  # (x, f_a(x), F_a(x) or None)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "f_a", "F_a"])
        for x, fx, Fx in self.rows:
            w.writerow([x.to_plain(), fx.to_plain(), "" if Fx is None else Fx.to_plain()])
        return buf.getvalue()

    def column(self, i: int):
        return [r[i] for r in self.rows]


def _sample_point(args):
    family, x, series = args
    try:
        return F_eval(family, x, series)
    except AsymptoteHit:
        return None


def sample_graph(family: CubicFamily, x_lo, x_hi, count: int, series: AbelSeries, workers: int = 1) -> GraphSample:
    """Uniform grid of ``(x, f_a(x), F_a(x))``; asymptote hits give ``None``."""
    p = family.precision
    x_lo, x_hi = Real.of(x_lo, p), Real.of(x_hi, p)
    if not (0 < x_lo < x_hi < family.a) or count < 2:
        raise DomainError("need 0 < x_lo < x_hi < a and count >= 2")
    step = (x_hi - x_lo) / (count - 1)
    xs = [x_lo + step * i for i in range(count)]
    jobs = [(family, x, series) for x in xs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            Fs = list(pool.map(_sample_point, jobs, chunksize=8))
    else:
        Fs = [_sample_point(j) for j in jobs]
    return GraphSample(family.a, tuple((x, family.f(x), F) for x, F in zip(xs, Fs)))
