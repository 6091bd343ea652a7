"""Limit laws of the walk: boundary triples, closed-form kernels, PDE solver.

Walk exponents (alpha, beta, A, B) map to a boundary triple (c1, c2, c3) in
c1 f(0) - c2 f'(0) + (c3/2) f''(0) = 0.  Four triples admit closed-form
transition kernels (reflected, absorbed, killed, elastic); the rest (sticky,
exponential-holding, mixed) are computed by a Crank-Nicolson solver with the
dynamic boundary row discretized implicitly.
"""

import numpy as np

from halfline.limits import (
    closed_form_law,
    kernel_closed_form,
    params_to_limit,
    survival_closed_form,
    wentzell_reference,
)

print("== regime dispatch ==")
for alpha, beta, A, B in ((3.0, 0.5, 1, 1), (1.5, 0.5, 1, 1),
                          (3.0, 1.0, 1, 1), (2.0, 1.0, 1, 1),
                          (2.0, 3.0, 1, 1), (3.0, 3.0, 1, 1),
                          (0.5, 0.5, 1, 1)):
    cond = params_to_limit(alpha, beta, A, B)
    print(f"alpha={alpha:3.1f} beta={beta:3.1f} -> {cond.regime:12s} "
          f"(c1, c2, c3) = ({cond.c1:.3f}, {cond.c2:.3f}, {cond.c3:.3f})")

print()
print("== closed forms vs the PDE solver ==")
u, t = 1.0, 0.5
for alpha, beta in ((3.0, 0.5), (3.0, 3.0)):
    cond = params_to_limit(alpha, beta, 1.0, 1.0)
    law = wentzell_reference(cond, u, t)
    exact = kernel_closed_form(cond, t, u, law.xs)
    print(f"{cond.regime:9s}: sup |pde - kernel| = "
          f"{np.max(np.abs(law.density - exact)):.2e}")

print()
print("== boundary atoms ==")
sticky = params_to_limit(3.0, 1.0, 1.0, 1.0)
for tt in (0.25, 0.5, 1.0):
    law = wentzell_reference(sticky, u, tt)
    print(f"sticky  t = {tt:4.2f}: mass sitting at 0 = {law.atom_zero:.4f}")
killed = params_to_limit(0.5, 0.5, 1.0, 1.0)
for tt in (0.25, 0.5, 1.0):
    law = closed_form_law(killed, u, tt)
    deficit = 1.0 - survival_closed_form(killed, tt, u)
    print(f"killed  t = {tt:4.2f}: cemetery mass {law.atom_delta:.4f} "
          f"(closed-form deficit {deficit:.4f})")

print()
print("== semigroup property of the solver ==")
mixed = params_to_limit(2.0, 1.0, 1.0, 1.0)
full = wentzell_reference(mixed, u, 1.0)
print(f"mixed t = 1.0 in one step : zero atom {full.atom_zero:.6f}, "
      f"cemetery {full.atom_delta:.6f}, total {full.total_mass():.6f}")
