"""
The recurrence x_(n+1) = x_n + 1 + 1/x_n^2
==========================================

x_n - n tends to a constant C(x_0). We derive the exact asymptotic
expansion, solve for C(2) from one long orbit, and compare four ways
of getting C'(2) and C''(2).
"""

import json

from iterlab.translated import derivative_report, derive_expansion, solve_C

# x_n ~ n + C + sum P_k(C)/n^k with P_k exact rational polynomials
table = derive_expansion(13)
print(derive_expansion(4).to_latex())
print("P_13(0) =", table.poly(13).coeffs[0])

# a short orbit already pins C down well
res = solve_C(2, N=10**4, K=13, p=80)
print("C(2) ~", res.C.to_plain()[:50], " (C(N) - C(2N) =", res.delta_2N.to_string()[:8] + ")")

# derivatives: finite differences, tail-corrected forward mode, the product
# formula for C' and the interchange-of-limits series for C''.
# N = 10**6 at 120 digits takes a few seconds per orbit; lower N for a quick look
rep = derivative_report(2, N=10**5, K=13, p=120, eps="1e-20", workers=3)
doc = rep.to_json()
for key in ("C", "C1_fd", "C1_forward", "C1_product", "C2_fd", "C2_forward", "C2_flawed_series"):
    print(f"{key:18s} {doc[key][:32]}")
print(json.dumps(doc["deltas"], indent=2))
