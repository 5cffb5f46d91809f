"""
Abel functions of x - a x^2 + x^3
=================================

For 1 <= a <= 2 the cubic pushes (0, a) down towards the parabolic
fixed point 0. F_a solves F_a(f_a(x)) = F_a(x) + 1. Near 0 it looks
like 1/(a y) + c log y + ..., and further out it is obtained by
iterating towards 0.
"""

from iterlab.abel import (
    CubicFamily,
    F_eval,
    critical_chain,
    derive_abel_series,
    sample_graph,
)

# the asymptotic series: leading 1/a, log coefficient (a^2 - 1)/a^2
series = derive_abel_series("9/5", 16, 50)
print("leading", series.leading.to_plain()[:20], "log", series.log_coeff.to_plain()[:20])
print("d_1..d_4", [d.to_plain()[:12] for d in series.regular[:4]])

# the functional equation, checked at one point
fam = CubicFamily.of("9/5", 50)
x = fam.a / 2
print("F(f(x)) - F(x) =", (F_eval(fam, fam.f(x), series) - F_eval(fam, x, series)).to_plain()[:24])

# once a >= sqrt(3), f_a has critical points, and their preimages are extrema of F_a
for a in ("sqrt(3)", "9/5", "19/10", "2"):
    fam = CubicFamily.of(a, 50)
    chain = critical_chain(fam, 3 if a != "2" else 2, derive_abel_series(fam.a, 16, 50))
    print(a)
    print("  xi  ", [v.to_plain()[:14] for v in chain.xi])
    print("  F   ", [v.to_plain()[:14] for v in chain.F_xi])
    if chain.F_eta is None:
        print("  asymptotes at", [v.to_plain()[:14] for v in chain.eta])

# a coarse graph at a=19/10; pass workers > 1 to spread the grid over processes
fam = CubicFamily.of("19/10", 30)
g = sample_graph(fam, "0.1", "1.85", 15, derive_abel_series(fam.a, 12, 30))
print(g.to_csv())
