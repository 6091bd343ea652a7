"""The separating family f_{k,j} behind the convergence metric.

Backbones are x^k exp(-x^2), normalized.  For small k the members are
adapted near 0 so that each one satisfies the boundary condition of the
limit process: k = 0 glues a polynomial through a plateau bump, k in 1..4
shifts the backbone right by 4/j and mollifies at scale 1/j.  Members with
k >= 5 vanish to high order at 0 and need no adaptation.
"""

import numpy as np

from halfline.limits import params_to_limit
from halfline.testfunctions import (
    build_family,
    family_member,
    norm_f_tilde,
    verify_G2_G3,
)

print("== backbone norms (exact formula) ==")
for k in (0, 1, 2, 4, 8):
    grid = np.linspace(0.0, 6.0, 200001)
    numeric = np.max(grid ** k * np.exp(-grid * grid))
    print(f"k = {k}: formula {norm_f_tilde(k):.10f}   grid {numeric:.10f}")

print()
print("== a family and its truncation tail ==")
mixed = params_to_limit(2.0, 1.0, 1.0, 1.0)
family = build_family(mixed, K=8, J=8)
members = {id(m): (k, j) for k, j, _, m in family.items()}
print(f"K = 8, J = 8: {sum(1 for _ in family.items())} weighted terms, "
      f"{len(members)} distinct members")
print(f"series tail bound beyond the truncation: {family.tail_bound():.3e}")

print()
print("== members meet the boundary condition ==")
eps = 1e-6
for k, j in ((0, 2), (1, 2), (2, 3)):
    m = family_member(mixed, k, j)
    f0 = float(m(0.0))
    d1 = float(m.deriv(0.0, 1))
    d2 = float(m.deriv(0.0, 2))
    residual = mixed.c1 * f0 - mixed.c2 * d1 + 0.5 * mixed.c3 * d2
    print(f"f_({k},{j}): c1 f(0) - c2 f'(0) + (c3/2) f''(0) = {residual:+.2e}")

print()
print("== growth envelopes of Lf and L^2 f across scales j ==")
report = verify_G2_G3(mixed, j_values=range(2, 41))
print(f"fitted growth of sup_k ||L f_(k,j)||  : j^{report['h1_exponent']:.2f}"
      f"  (ceiling j^2)")
print(f"fitted growth of sup_k ||L^2 f_(k,j)||: j^{report['h2_exponent']:.2f}"
      f"  (ceiling j^4)")
print(f"weighted norm sum {report['norm_sum']:.6f} vs geometric "
      f"{report['norm_sum_expected']:.6f}")
