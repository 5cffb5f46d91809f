"""Convergence rates of the metallic-mean continued fractions.

For an integer ``m >= 1`` the recurrence ``x_k = m + 1/x_{k-1}``, ``x_0 = m``
converges to ``rho = (m + sqrt(m**2 + 4))/2`` with odd terms above and even
terms below the limit. Writing ``u_k = x_{2k+1} - rho`` and
``v_k = rho - x_{2k}``, both shrink by ``lam = 1/(1 + m*rho)**2`` per step,
and the limits ``L_u = lim (1+m*rho)**(2k) u_k`` (and likewise ``L_v``) are
quadratic irrationals in ``rho``.

Two-step maps. ``T(x) = ((m**2+1) x + m)/(m x + 1)`` sends ``x_k`` to
``x_{k+2}``; conjugating by the shift to the fixed point gives

    f(u) = T(rho + u) - rho = alpha*u / (m*u + delta)
    g(v) = rho - T(rho - v) = alpha*v / (delta - m*v)

with ``delta = 1 + m*rho`` and ``alpha = m**2 + 1 - m*rho``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import DomainError, PrecisionError
from .precision import Real, pow10, sqrt

GUARD_DIGITS = 20
MAX_STEPS = 10**4
RECOGNITION_BOUND = 200


@dataclass(frozen=True)
class MetallicParams:
    m: int
    rho: Real
    lam: Real
    d: int

    @property
    def delta(self) -> Real:
        """``1 + m*rho`` (equal to ``rho**2``)."""
        return 1 + self.m * self.rho


def metallic_params(m: int, p: int = 60) -> MetallicParams:
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    d = m * m + 4
    rho = (m + sqrt(Real.of(d, p))) / 2
    lam = 1 / (1 + m * rho) ** 2
    return MetallicParams(m, rho, lam, d)


@dataclass(frozen=True)
class ConvergentState:
    k: int
    x: Fraction


def convergents(m: int, k_max: int) -> list[ConvergentState]:
    """Exact ``x_0 = m, ..., x_{k_max}``."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    x = Fraction(m)
    out = [ConvergentState(0, x)]
    for k in range(1, k_max + 1):
        x = m + 1 / x
        out.append(ConvergentState(k, x))
    return out


def offset(x: Fraction, params: MetallicParams, p: int) -> Real:
    """``x - rho`` without cancellation: ``(x**2 - m*x - 1)/(x - rho_bar)``, ``rho_bar = m - rho``."""
    m = params.m
    num = x * x - m * x - 1
    return Real.of(num, p) / (Real.of(x, p) - (m - params.rho.with_precision(p)))


def interleaving_holds(m: int, k_max: int) -> bool:
    """``x_{2k} < x_{2k+2} < rho < x_{2k+3} < x_{2k+1}`` for all ``k <= k_max``.

    Decided exactly: ``x < rho`` iff ``x**2 - m*x - 1 < 0`` for positive x.
    """
    xs = [c.x for c in convergents(m, 2 * k_max + 3)]

    def below(x):
        return x * x - m * x - 1 < 0

    for k in range(k_max + 1):
        a, b, c, d = xs[2 * k], xs[2 * k + 2], xs[2 * k + 3], xs[2 * k + 1]
        if not (a < b and below(b) and not below(c) and c < d):
            return False
    return True


@dataclass(frozen=True)
class AuxMapBundle:
    """Two-step maps as Mobius quadruples ``(alpha, beta, gamma, delta)``: x -> (alpha x + beta)/(gamma x + delta)."""

    m: int
    params: MetallicParams
    f_coeffs: tuple
    g_coeffs: tuple
    u0: Real
    v0: Real
    M_f: Real
    M_g: Real
    F_at_0: Real
    G_at_0: Real
    F_monotone: bool
    G_monotone: bool

    def f(self, x) -> Real:
        a, b, c, d = self.f_coeffs
        return (a * x + b) / (c * x + d)

    def g(self, x) -> Real:
        a, b, c, d = self.g_coeffs
        return (a * x + b) / (c * x + d)

    def F(self, x) -> Real:
        """``(f(x) - lam*x)/x**2`` extended continuously to ``x = 0``."""
        if x == 0:
            return self.F_at_0
        return (self.f(x) - self.params.lam * x) / (x * x)

    def G(self, x) -> Real:
        if x == 0:
            return self.G_at_0
        return (self.g(x) - self.params.lam * x) / (x * x)


def _sup_abs(fn, lo: Real, hi: Real, samples: int):
    """Max of ``|fn|`` over a uniform grid plus whether the samples are monotone."""
    xs = [lo + (hi - lo) * i / (samples - 1) for i in range(samples)]
    vals = [fn(x) for x in xs]
    inc = all(b >= a for a, b in zip(vals, vals[1:]))
    dec = all(b <= a for a, b in zip(vals, vals[1:]))
    return max(abs(v) for v in vals), inc or dec


def aux_maps(m: int, p: int = 60, samples: int = 201) -> AuxMapBundle:
    """Two-step maps ``f, g`` and bounds ``M = sup|F|``, ``sup|G|`` on ``[0, u0]``, ``[0, v0]``.

    The sup is taken over a dense grid; monotonicity of the samples is
    reported rather than assumed.
    """
    P = metallic_params(m, p)
    rho, delta = P.rho, P.delta
    alpha = m * m + 1 - m * rho
    f_coeffs = (alpha, Real.of(0, p), Real.of(m, p), delta)
    g_coeffs = (alpha, Real.of(0, p), Real.of(-m, p), delta)
    u0 = Real.of(m + Fraction(1, m), p) - rho
    v0 = rho - m
    # F(x) = -m*lam/(m x + delta), G(x) = m*lam/(delta - m x): both finite at 0
    F0 = -m * P.lam / delta
    G0 = m * P.lam / delta
    partial = AuxMapBundle(m, P, f_coeffs, g_coeffs, u0, v0, Real.of(0, p), Real.of(0, p), F0, G0, False, False)
    M_f, mono_f = _sup_abs(partial.F, Real.of(0, p), u0, samples)
    M_g, mono_g = _sup_abs(partial.G, Real.of(0, p), v0, samples)
    return AuxMapBundle(m, P, f_coeffs, g_coeffs, u0, v0, M_f, M_g, F0, G0, mono_f, mono_g)


def recognize_quadratic(x: Real, d: int, bound: int = RECOGNITION_BOUND, m: Optional[int] = None):
    """Find rationals ``(p, q)`` with ``x = p + q*rho``, ``rho = (m + sqrt(d))/2``.

    Bounded search: for each denominator ``D <= bound`` and numerator
    ``Q`` with ``|Q| <= bound``, round ``D*x - Q*rho`` to an integer ``P``
    and accept when ``|x - (P + Q*rho)/D| < 10**(10 - precision)``. Smallest
    ``D``, then smallest ``|Q|``, wins. Returns ``None`` if nothing fits.
    """
    if d <= 0 or math.isqrt(d) ** 2 == d:
        raise DomainError("d must be a positive non-square")
    if m is None:
        r = d - 4
        m = math.isqrt(r) if r > 0 and math.isqrt(r) ** 2 == r else 0
    prec = x.precision
    rho = (m + sqrt(Real.of(d, prec))) / 2
    tol = pow10(10 - prec, prec)
    xf, rf = float(x), float(rho)
    for D in range(1, bound + 1):
        for Q in sorted(range(-bound, bound + 1), key=lambda q: (abs(q), q)):
            P = round(D * xf - Q * rf)
            if abs(P) > bound or abs(D * xf - Q * rf - P) > 1e-6:
                continue
            if abs(x - (P + Q * rho) / D) < tol:
                return Fraction(P, D), Fraction(Q, D)
    return None


@dataclass(frozen=True)
class RateResult:
    m: int
    rho: Real
    lam: Real
    L_u: Real
    L_v: Real
    L_u_direct: Real
    L_v_direct: Real
    closed_u: Optional[tuple]
    closed_v: Optional[tuple]
    iterations: int
    tolerance: Real
    achieved: Real

    def to_json(self, digits: Optional[int] = None):
        def s(r):
            return (r.with_precision(digits) if digits else r).to_plain()

        def closed(c):
            return None if c is None else {"p": str(c[0]), "q": str(c[1])}

        return {
            "m": self.m,
            "rho": s(self.rho),
            "lambda": s(self.lam),
            "L_u": s(self.L_u),
            "L_v": s(self.L_v),
            "closed_u": closed(self.closed_u),
            "closed_v": closed(self.closed_v),
            "iterations": self.iterations,
            "tolerance": self.tolerance.to_string(),
            "achieved": self.achieved.to_string(),
        }

    def dumps(self, digits: Optional[int] = None) -> str:
        return json.dumps(self.to_json(digits), indent=2, sort_keys=True)


def convergence_constants(m: int, p: int = 60, tol=None, recognize: bool = True,
                          bound: int = RECOGNITION_BOUND) -> RateResult:
    """``L_u`` and ``L_v`` by the telescoped product, cross-checked by direct scaling.

    Product route: ``u_0 * prod_j (1 + delta**2 * u_j * F(u_j))`` with ``F``
    evaluated through the closed-form two-step map. Direct route:
    ``delta**(2k) * u_k`` from exact convergents. Iteration stops once the
    two agree within ``tol`` and the current product factor is within
    ``tol`` of 1.
    """
    wp = p + GUARD_DIGITS
    if tol is None:
        tol = pow10(-(p - 5), wp)
    tol = Real.of(tol, wp)
    if tol <= 0:
        raise DomainError("tol must be positive")
    aux = aux_maps(m, wp, samples=11)
    P = aux.params
    d2 = P.delta * P.delta
    if tol < pow10(-(wp - 10), wp):
        raise PrecisionError(f"tolerance {tol} unreachable at {p} digits", required_digits=2 * p)

    x_odd = Fraction(m) + Fraction(1, m)  # x_1
    x_even = Fraction(m)  # x_0
    u = offset(x_odd, P, wp)
    v = -offset(x_even, P, wp)
    prod_u = u
    prod_v = v
    scale = Real.of(1, wp)
    for k in range(1, MAX_STEPS + 1):
        fac_u = 1 + d2 * u * aux.F(u)
        fac_v = 1 + d2 * v * aux.G(v)
        prod_u = prod_u * fac_u
        prod_v = prod_v * fac_v
        # advance the exact convergents by two steps
        x_odd = m + 1 / (m + 1 / x_odd)
        x_even = m + 1 / (m + 1 / x_even)
        u = offset(x_odd, P, wp)
        v = -offset(x_even, P, wp)
        scale = scale * d2
        direct_u = scale * u
        direct_v = scale * v
        achieved = max(abs(prod_u - direct_u), abs(prod_v - direct_v))
        settled = abs(fac_u - 1) < tol and abs(fac_v - 1) < tol
        if achieved < tol and settled:
            break
    else:
        raise PrecisionError(f"no convergence within {MAX_STEPS} steps", required_digits=2 * p)

    L_u, L_v = prod_u.with_precision(p), prod_v.with_precision(p)
    cu = cv = None
    if recognize:
        cu = recognize_quadratic(L_u, P.d, bound, m)
        cv = recognize_quadratic(L_v, P.d, bound, m)
    return RateResult(
        m, P.rho.with_precision(p), P.lam.with_precision(p), L_u, L_v,
        direct_u.with_precision(p), direct_v.with_precision(p),
        cu, cv, k, tol.with_precision(p), achieved.with_precision(p),
    )


def conjectured_limits(m: int, p: int = 60) -> tuple[Real, Real]:
    """``(sqrt(m**2+4) / rho**4, sqrt(m**2+4) / rho**2)``."""
    P = metallic_params(m, p)
    s = sqrt(Real.of(P.d, p))
    return s / P.rho**4, s / P.rho**2


def direct_limit(m: int, k: int, p: int) -> tuple[Real, Real]:
    """``delta**(2k) * u_k`` and ``delta**(2k) * v_k`` straight from exact convergents."""
    P = metallic_params(m, p)
    xs = convergents(m, 2 * k + 1)
    scale = P.delta ** (2 * k)
    return scale * offset(xs[2 * k + 1].x, P, p), -scale * offset(xs[2 * k].x, P, p)


@dataclass
class HypothesisReport:
    m: int
    checks: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    decay_bound: Optional[Real] = None
    max_decay_ratio: Optional[Real] = None
    F_monotone: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def record(self, name: str, passed: bool, detail: str = ""):
        self.checks[name] = passed
        if not passed:
            self.violations.append(f"{name}: {detail}" if detail else name)


def verify_hypotheses(m: int, samples: int = 50, k_max: int = 40, p: int = 60) -> HypothesisReport:
    """Check the contraction hypotheses behind the product formula on a grid and on the orbit."""
    if samples < 10:
        raise DomainError("samples must be >= 10")
    aux = aux_maps(m, p, samples=samples)
    P = aux.params
    rep = HypothesisReport(m, F_monotone=aux.F_monotone and aux.G_monotone)
    zero = Real.of(0, p)
    eps = pow10(-(p - 10), p)
    rep.record("f(0)=0", abs(aux.f(zero)) < eps)
    rep.record("g(0)=0", abs(aux.g(zero)) < eps)
    rep.record("lambda<1", zero < P.lam < 1, str(P.lam))
    for name, fn, hi in (("f", aux.f, aux.u0), ("g", aux.g, aux.v0)):
        bad = []
        for i in range(1, samples + 1):
            x = hi * i / samples
            y = fn(x)
            if not (0 < y < x):
                bad.append(str(x))
        rep.record(f"0<{name}(x)<x", not bad, ", ".join(bad[:3]))
    # exact orbit: u_k decreases geometrically
    xs = [c.x for c in convergents(m, 2 * k_max + 3)]
    us = [xs[2 * k + 1] for k in range(k_max + 2)]
    ratios = [offset(us[k + 1], P, p) / offset(us[k], P, p) for k in range(k_max + 1)]
    rep.max_decay_ratio = max(ratios).with_precision(p)
    if m == 1:
        # ratio <= lam + M*u0 = 39 - 24*phi < 3/5
        rep.decay_bound = P.lam + aux.M_f * aux.u0
        rep.record("u_{k+1}<(3/5)u_k", all(r < Fraction(3, 5) for r in ratios))
        rep.record("decay ratio <= 39-24*phi", all(r <= rep.decay_bound for r in ratios))
    else:
        rep.record("u_{k+1}<u_k", all(0 < r < 1 for r in ratios))
    return rep
