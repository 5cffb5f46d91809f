from decimal import Decimal
from fractions import Fraction as Fr

import pytest

from iterlab import translated as tr
from iterlab.errors import DomainError, PrecisionError
from iterlab.formal import Poly
from iterlab.precision import Real, real_from_decimal

# coefficients of 1/n^k in x_n - n - C, ascending powers of C, transcribed by hand
PRINTED = {
    1: [-1],
    2: [Fr(-1, 2), 1],
    3: [Fr(-5, 6), 1, -1],
    4: [Fr(-5, 4), Fr(5, 2), Fr(-3, 2), 1],
    5: [Fr(-31, 15), 5, -5, 2, -1],
    6: [Fr(-11, 3), Fr(31, 3), Fr(-25, 2), Fr(25, 3), Fr(-5, 2), 1],
    # printed as -25/4 C^4; -25/2 is forced by the neighbouring entries and by the orbit itself
    7: [Fr(-473, 70), 22, -31, 25, Fr(-25, 2), 3, -1],
    8: [Fr(-511, 40), Fr(473, 10), -77, Fr(217, 3), Fr(-175, 4), Fr(35, 2), Fr(-7, 2), 1],
    9: [Fr(-46651, 1890), Fr(511, 5), Fr(-946, 5), Fr(616, 3), Fr(-434, 3), 70, Fr(-70, 3), 4, -1],
    10: [Fr(-20401, 420), Fr(46651, 210), Fr(-4599, 10), Fr(2838, 5), -462, Fr(1302, 5), -105, 30,
         Fr(-9, 2), 1],
    11: [Fr(-16124719, 166320), Fr(20401, 42), Fr(-46651, 42), 1533, -1419, 924, -434, 150, Fr(-75, 2),
         5, -1],
    12: [Fr(-1183139, 6048), Fr(16124719, 15120), Fr(-224411, 84), Fr(513161, 126), Fr(-16863, 4),
         Fr(15609, 5), -1694, 682, Fr(-825, 4), Fr(275, 6), Fr(-11, 2), 1],
    13: [Fr(-1076978467, 2702700), Fr(1183139, 504), Fr(-16124719, 2520), Fr(224411, 21),
         Fr(-513161, 42), Fr(50589, 5), Fr(-31218, 5), 2904, -1023, 275, -55, 6, -1],
}

C2 = "2.5987868558248713482599664951883194762422902129186367437296275388853210"


@pytest.mark.parametrize("k", sorted(PRINTED))
def test_expansion_matches_printed(k):
    assert tr.derive_expansion(13).poly(k) == Poly("C", PRINTED[k])


def test_expansion_degrees_and_residual():
    table = tr.derive_expansion(15)
    for k in range(1, 16):
        assert table.poly(k).degree == k - 1
        assert table.poly(k).coeffs[-1] == (-1) ** k
    r = tr.expansion_residual(table)
    assert all(c.degree == -1 for c in r.coeffs)


def test_expansion_prefix_stable():
    assert tr.derive_expansion(6).polys == tr.derive_expansion(13).truncate(6).polys


def test_latex_head():
    tex = tr.derive_expansion(3).to_latex()
    assert tex.startswith(r"x_{n}\sim n+C-\frac{1}{n}")
    assert r"-\frac{5}{6}+C-C^{2}" in tex


def test_iterate_exact_small():
    assert tr.iterate(2, 1, 30) == Real.of("3.25", 30)
    x = Fr(2)
    for _ in range(6):
        x = x + 1 + 1 / x**2
    assert abs(tr.iterate(2, 6, 60) - Real.of(x, 60)) < Real.of("1e-58", 60)


def test_naive_series():
    assert tr.naive_series_C(2, 1) == Real.of("2.25", 50)
    vals = [tr.naive_series_C(2, n) for n in (1, 10, 100, 1000)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    # tail of sum 1/x_n^2 is about 1/N
    C = real_from_decimal(C2, 50)
    gap = C - vals[-1]
    assert Real.of("0.0009", 50) < gap < Real.of("0.0011", 50)


def test_first_orbit_terms():
    t1, h1 = tr.forward_derivatives(2, 1)
    assert t1 == Real.of("0.75", 50)
    assert h1 == Real.of("0.375", 50)
    assert tr.derivative_product(2, 1) == Real.of("0.75", 50)
    # first term of t_N * sum (6/x^4)/(1-2/x^3)
    assert tr.flawed_second_series(2, 1) == Real.of("0.375", 50)


def test_product_converges():
    a = tr.derivative_product(2, 2000)
    assert abs(a - real_from_decimal("0.6615613240486", 50)) < Real.of("1e-6", 50)


def test_solve_C_small_N():
    res = tr.solve_C(2, N=2000, K=13, p=60)
    assert abs(res.C - real_from_decimal(C2, 60)) < Real.of("1e-40", 60)
    assert abs(res.delta_2N) <= res.error_bound * tr.SAFETY_FACTOR


@pytest.mark.parametrize("N", [500, 1000, 2000])
def test_solve_C_N_robust(N):
    ref = real_from_decimal(C2, 60)
    assert abs(tr.solve_C(2, N=N, K=13, p=60, check=False).C - ref) < Real.of(f"1e-{int(2 * len(str(N)) + 8)}", 60)


def test_large_start_against_naive():
    N = 4000
    C = tr.solve_C(100, N=N, K=13, p=60, check=False).C
    naive = tr.naive_series_C(100, N, 60)
    # remaining tail sum_{n>=N} 1/x_n^2 is about 1/(N+100)
    assert abs(C - naive - Real.of(Fr(1, N + 100), 60)) < Real.of("1e-6", 60)


def test_misprinted_coefficient_rejected_by_orbit():
    n = 200
    C = real_from_decimal(C2, 60)
    x = tr.iterate(2, n, 60)
    table = tr.derive_expansion(13)
    tail = sum((Real.of(table.poly(k)(C), 60) / n**k for k in range(1, 14)), Real.of(0, 60))
    assert abs(x - n - C - tail) < Real.of("1e-25", 60)
    wrong = Real.of(Fr(25, 4), 60) * C**4 / n**7
    assert abs(x - n - C - tail - wrong) > Real.of("1e-15", 60)


def test_solve_C_flags_poor_setup():
    # large C makes the tail terms C^(k-1)/N^k too big for the 2N check
    with pytest.raises(PrecisionError):
        tr.solve_C(100, N=4000, K=13, p=60)


def test_domain():
    with pytest.raises(DomainError):
        tr.iterate(2, -1)
    with pytest.raises(DomainError):
        tr.solve_C(2, N=100, K=20, p=60, table=tr.derive_expansion(13))
    with pytest.raises(DomainError):
        tr.derivative_report(2, N=10, p=40, derivatives=("magic",))


def test_fd_precision_guard():
    with pytest.raises(PrecisionError):
        tr.finite_difference(2, eps="1e-20", N=1000, K=13, p=50)
    with pytest.raises(PrecisionError):
        tr.finite_difference(2, eps="1e-20", N=10, K=13, p=120)


def test_small_report_consistency():
    rep = tr.derivative_report(2, N=10**4, K=13, p=100, derivatives=("forward", "product", "series", "fd"),
                               eps="1e-12")
    v = rep.values
    assert abs(v["C1_forward"] - v["C1_fd"]) < Real.of("1e-20", 100)
    assert abs(v["C2_forward"] - v["C2_fd"]) < Real.of("1e-10", 100)
    assert abs(v["C2_flawed_series"] - v["C2_fd"]) > Real.of("0.015", 100)
    doc = rep.to_json()
    assert doc["C2_flawed_series_status"] == "known_flawed"
    assert set(doc["deltas"]) >= {"C1_forward-C1_fd", "C2_flawed_series-C2_fd"}
    assert Decimal(doc["C"]) == rep.C.value
