"""
How fast do metallic-mean convergents close in?
===============================================

The continued fraction m + 1/(m + 1/(m + ...)) converges to
rho = (m + sqrt(m^2 + 4))/2. Odd convergents come down from above,
even ones climb from below, and each side shrinks geometrically.
"""

from iterlab.cf_rates import (
    aux_maps,
    convergence_constants,
    convergents,
    interleaving_holds,
    metallic_params,
    offset,
)

# the first few convergents of the golden and silver means, exactly
for m in (1, 2):
    print(m, [str(c.x) for c in convergents(m, 6)])

# they interleave around rho; this is decided in exact rationals
print("interleaving holds:", interleaving_holds(1, 40), interleaving_holds(2, 40))

# the gap u_k = x_{2k+1} - rho shrinks by lambda = 1/(1 + m*rho)^2 per step
params = metallic_params(1, 60)
xs = [c.x for c in convergents(1, 45)]
for k in (5, 10, 20):
    ratio = offset(xs[2 * k + 3], params, 60) / offset(xs[2 * k + 1], params, 60)
    print(f"k={k:2d}  u_(k+1)/u_k = {ratio.to_plain()[:22]}")
print("lambda           =", params.lam.to_plain()[:22])

# so u_k ~ L_u * lambda^k; the limits come out as quadratic irrationals
for m in (1, 2, 3):
    r = convergence_constants(m, 60)
    closed = "outside the search bound" if r.closed_u is None else "%s + %s*rho" % r.closed_u
    print(f"m={m}  L_u={r.L_u.to_plain()[:27]}  L_v={r.L_v.to_plain()[:27]}  "
          f"L_u = {closed}  ({r.iterations} iterations)")

# the two-step maps behind the argument, and their curvature bounds
aux = aux_maps(1, 60)
print("M_f =", aux.M_f.to_plain()[:20], " M_g =", aux.M_g.to_plain()[:20])
