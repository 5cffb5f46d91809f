import random
from fractions import Fraction

import mpmath
import pytest

from iterlab import abel
from iterlab.abel import (
    AsymptoteHit,
    CubicFamily,
    F_eval,
    abel_residual_series,
    critical_chain,
    critical_pair,
    derive_abel_series,
    inverse_branch,
    parse_parameter,
    sample_graph,
)
from iterlab.errors import DomainError
from iterlab.precision import Real, real_from_decimal

P = 50

# (xi_k, F(xi_k)) and (eta_k, F(eta_k)) printed to 12 places
CHAINS = {
    "sqrt(3)": (
        [("0.577350269189", "1.354567323982"), ("1.304766026504", "0.354567323982"),
         ("1.613468669954", "-0.645432676017"), ("1.701609819539", "-1.645432676017")],
        None,
    ),
    "9/5": (
        [("0.436700683814", "1.446679716680"), ("1.286564033401", "0.446679716680"),
         ("1.663738765627", "-0.553320283319"), ("1.766943652708", "-1.553320283319")],
        [("0.763299316185", "1.707702719524"), ("1.472909661275", "0.707702719524"),
         ("1.717164058718", "-0.292297280475"), ("1.780129844535", "-1.292297280475")],
    ),
    "19/10": (
        [("0.372991677469", "1.524207513358"), ("1.368415902116", "0.524207513358"),
         ("1.771547833683", "-0.475792486641"), ("1.871470296788", "-1.475792486641")],
        [("0.893674989196", "3.626360576962"), ("1.623120175823", "2.626360576962"),
         ("1.836690492410", "1.626360576962"), ("1.886108430692", "0.626360576962")],
    ),
    "2": (
        [("0.333333333333", "1.574672245867"), ("1.475329585787", "0.574672245867"),
         ("1.884745179770", "-0.425327754132")],
        [("1", None), ("1.754877666246", None), ("1.948914407000", None)],
    ),
}


def R(s):
    return real_from_decimal(s, P)


def near(x, s, tol):
    return abs(x - R(s)) < R(tol)


@pytest.fixture(scope="module")
def series():
    cache = {}

    def get(a, K=16):
        key = (a, K)
        if key not in cache:
            cache[key] = derive_abel_series(a, K, P)
        return cache[key]

    return get


def test_parse_parameter():
    assert parse_parameter("9/5", P) == Real.of(Fraction(9, 5), P)
    assert parse_parameter("1.9", P) == R("1.9")
    assert abs(parse_parameter("sqrt(3)", P) ** 2 - 3) < R("1e-48")


def test_family_domain():
    with pytest.raises(DomainError):
        CubicFamily.of("2.1")
    with pytest.raises(DomainError):
        CubicFamily.of("0.5")
    fam = CubicFamily.of("3/2")
    assert fam.f(R("1")) == R("0.5")
    assert fam.df(R("1")) == R("1")


def test_critical_pairs():
    xi, eta = critical_pair(parse_parameter("9/5", P))
    assert abs(xi - (9 - mpmath_sqrt(6)) / 15) < R("1e-45")
    assert abs(eta - (9 + mpmath_sqrt(6)) / 15) < R("1e-45")
    xi, eta = critical_pair(parse_parameter("sqrt(3)", P))
    assert xi == eta
    xi, eta = critical_pair(parse_parameter("2", P))
    assert abs(xi - Real.of(Fraction(1, 3), P)) < R("1e-48") and eta == 1
    with pytest.raises(DomainError):
        critical_pair(parse_parameter("5/3", P))


def mpmath_sqrt(n):
    with mpmath.workdps(P + 10):
        return R(mpmath.nstr(mpmath.sqrt(n), P + 5))


@pytest.mark.parametrize("a,c", [("2", Fraction(3, 4)), ("sqrt(3)", Fraction(2, 3)), ("9/5", Fraction(56, 81))])
def test_leading_and_log(series, a, c):
    s = series(a)
    assert abs(s.leading * s.a - 1) < R("1e-45")
    assert abs(s.log_coeff - Real.of(c, P)) < R("1e-45")


def test_log_term_is_needed():
    # independent check: without the log term A(f(y)) - A(y) - 1 is O(y); with it O(y^2)
    y = mpmath.mpf("1e-4")
    a = mpmath.mpf(2)
    fy = y - a * y**2 + y**3
    bare = 1 / (a * fy) - 1 / (a * y) - 1
    with_log = bare + mpmath.mpf(3) / 4 * mpmath.log(fy / y)
    assert abs(bare) > y / 10
    assert abs(with_log) < 10 * y**2


def test_residual_series_vanishes(series):
    r = abel_residual_series(series("9/5"))
    for j in range(r.order):
        assert abs(r[j]) < R("1e-40")


def test_numeric_residual_order_12():
    s = derive_abel_series("9/5", 12, P)
    with mpmath.workdps(60):
        a = mpmath.mpf(9) / 5
        coeffs = [mpmath.mpf(d.to_string()) for d in s.regular]

        def A(y):
            return (mpmath.mpf(s.leading.to_string()) / y + mpmath.mpf(s.log_coeff.to_string()) * mpmath.log(y)
                    + sum(d * y ** (j + 1) for j, d in enumerate(coeffs)))

        y = mpmath.mpf("1e-3")
        resid = A(y - a * y**2 + y**3) - A(y) - 1
    assert abs(resid) < mpmath.mpf("1e-30")


def test_normalizations_differ_by_c_log_a():
    nf = derive_abel_series("9/5", 16, P)
    zc = derive_abel_series("9/5", 16, P, normalization="zero_constant")
    fam = CubicFamily.of("9/5", P)
    diff = F_eval(fam, "0.5", nf) - F_eval(fam, "0.5", zc)
    assert abs(diff - nf.log_coeff * abel.ln(nf.a)) < R("1e-38")
    assert zc.constant == 0
    with pytest.raises(DomainError):
        derive_abel_series("9/5", 16, P, normalization="other")


def test_inverse_branch():
    fam = CubicFamily.of("9/5", P)
    xi0 = critical_pair(fam.a)[0]
    assert near(inverse_branch(fam, xi0), "1.286564033401", "1e-12")
    fam2 = CubicFamily.of("2", P)
    assert near(inverse_branch(fam2, 1), "1.754877666246", "1e-12")
    for t in ("0.95", "1.2", "1.7"):
        x = inverse_branch(fam, t)
        assert abs(fam.f(x) - R(t)) < R("1e-45")
    with pytest.raises(DomainError):
        inverse_branch(fam, "1.81")


@pytest.mark.parametrize("a", list(CHAINS))
def test_chains_match_printed(series, a):
    fam = CubicFamily.of(a, P)
    xi_rows, eta_rows = CHAINS[a]
    chain = critical_chain(fam, len(xi_rows) - 1, series(a))
    for (x, F), got_x, got_F in zip(xi_rows, chain.xi, chain.F_xi):
        assert near(got_x, x, "1e-10")
        assert near(got_F, F, "1e-9")
    if a == "2":
        assert chain.is_asymptote_chain and chain.F_eta is None
        for (x, _), got in zip(eta_rows, chain.eta):
            assert near(got, x, "1e-10")
        with pytest.raises(AsymptoteHit):
            F_eval(fam, chain.eta[1], series(a))
    elif eta_rows is None:
        assert chain.xi == chain.eta and chain.F_eta == chain.F_xi
    else:
        for (x, F), got_x, got_F in zip(eta_rows, chain.eta, chain.F_eta):
            assert near(got_x, x, "1e-10")
            assert near(got_F, F, "1e-9")


def test_chain_steps_by_one(series):
    fam = CubicFamily.of("19/10", P)
    chain = critical_chain(fam, 3, series("19/10"))
    for k in range(3):
        assert abs(chain.F_xi[k] - chain.F_xi[k + 1] - 1) < R("1e-38")


def test_classification(series):
    for a in ("9/5", "19/10", "2"):
        chain = critical_chain(CubicFamily.of(a, P), 1, series(a), classify=True)
        assert chain.kinds == ("min", "min")
    fam = CubicFamily.of("9/5", P)
    assert abel.classify_critical_point(fam, critical_pair(fam.a)[1], series("9/5")) == "max"
    chain = critical_chain(CubicFamily.of("sqrt(3)", P), 0, series("sqrt(3)"), classify=True)
    assert chain.kinds == ("flat",)


def test_functional_equation_random(series):
    rng = random.Random(1234)
    for _ in range(20):
        a = Fraction(rng.randint(100, 200), 100)
        fam = CubicFamily.of(a, P)
        s = series(str(a))
        x = Real.of(Fraction(rng.randint(1, 999), 1000), P) * fam.a
        if fam.a == 2 and abs(x - 1) < R("1e-3"):
            continue
        # reference: A(x_n) - n read far beyond F_eval's stopping point
        y, n = x, 0
        while y > R("1e-4"):
            y, n = fam.f(y), n + 1
        lhs = F_eval(fam, fam.f(x), s)
        assert abs(lhs - (s.evaluate(y) - n) - 1) < R("1e-30")


def test_stopping_point_independent(series):
    fam = CubicFamily.of("9/5", P)
    s = series("9/5")
    x, n = R("0.6"), 0
    while x > R("2e-5"):
        x, n = fam.f(x), n + 1
    assert n > 1000
    assert abs(F_eval(fam, "0.6", s) - (s.evaluate(x) - n)) < R("1e-35")


def test_order_independence(series):
    fam = CubicFamily.of("19/10", P)
    a = F_eval(fam, "1.2", series("19/10", 16))
    b = F_eval(fam, "1.2", series("19/10", 20))
    assert abs(a - b) < R("1e-30")


def test_F_domain(series):
    fam = CubicFamily.of("9/5", P)
    for x in ("0", "1.8", "-0.1"):
        with pytest.raises(DomainError):
            F_eval(fam, x, series("9/5"))


def _sign_changes(values):
    diffs = [b - a for a, b in zip(values, values[1:])]
    return [i for i in range(len(diffs) - 1) if (diffs[i] > 0) != (diffs[i + 1] > 0)]


def test_graph_decreasing_three_halves():
    fam = CubicFamily.of("3/2", 30)
    s = derive_abel_series("3/2", 12, 30)
    g = sample_graph(fam, "0.05", "1.45", 40, s)
    Fs = g.column(2)
    assert all(b < a for a, b in zip(Fs, Fs[1:]))
    fs = g.column(1)
    assert all(b > a for a, b in zip(fs, fs[1:]))


@pytest.mark.parametrize("a,lo,hi,marks", [("9/5", "0.3", "0.9", (0.436, 0.763)), ("19/10", "0.25", "1.0", (0.372, 0.893))])
def test_graph_extrema(a, lo, hi, marks):
    fam = CubicFamily.of(a, 30)
    s = derive_abel_series(a, 12, 30)
    g = sample_graph(fam, lo, hi, 61, s)
    xs = [float(x) for x in g.column(0)]
    turns = _sign_changes(g.column(2))
    assert len(turns) == 2
    for i, mark in zip(turns, marks):
        assert xs[i] - 0.02 < mark < xs[i + 2] + 0.02


def test_graph_csv_nulls():
    fam = CubicFamily.of("2", 30)
    s = derive_abel_series("2", 12, 30)
    g = sample_graph(fam, "0.5", "1.5", 5, s)
    lines = g.to_csv().splitlines()
    assert lines[0] == "x,f_a,F_a"
    assert len(lines) == 6
    assert lines[3].startswith("1.0") and lines[3].endswith(",")
    assert g.rows[2][2] is None


def test_graph_workers_match():
    fam = CubicFamily.of("9/5", 30)
    s = derive_abel_series("9/5", 12, 30)
    assert sample_graph(fam, "0.1", "1.7", 9, s, workers=2) == sample_graph(fam, "0.1", "1.7", 9, s)
