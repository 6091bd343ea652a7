"""One walk, three ways: a single path, the exact time-t law, a Monte Carlo law.

The chain lives on sites 0, 1, ..., M of the lattice (1/n)N plus a cemetery
(encoded as site -1).  Interior sites jump left/right at rate n^2/2 each;
site 0 jumps to the cemetery at rate A n^(2-alpha) and to site 1 at rate
B n^(2-beta).
"""

import numpy as np

from halfline.walk import (
    BoundaryParams,
    default_truncation,
    distribution_at,
    ensemble_at,
    sample_path,
)

n = 20
params = BoundaryParams(n=n, alpha=1.5, beta=0.5, A=1.0, B=1.0)
t = 0.5
x0 = n                      # the walk starts at lattice position 1.0

print("== one exact path ==")
times, sites = sample_path(params, x0, t, seed=4)
print(f"{len(times)} jump events up to t = {t}")
for tm, s in list(zip(times, sites))[:8]:
    print(f"  t = {tm:8.5f}  site {s:3d}  (position {s / n:.2f})")
print("  ...")
final = sites[-1]
print(f"final state: {'cemetery' if final == -1 else f'site {final}'}")

print()
print("== exact law vs Monte Carlo at time t ==")
M = default_truncation(n, t, 1.0)
exact = distribution_at(params, x0, t, M)
mc = ensemble_at(params, x0, t, paths=200_000, seed=4, M=M, threads=4)
print(f"truncation M = {M} sites, exact mass {exact.total_mass():.6f}")
print(f"cemetery mass: exact {exact.atom_delta:.5f}  mc {mc.atom_delta:.5f}")
print("site   exact      mc")
for site in range(0, 36, 5):
    print(f"{site:4d}  {exact.masses[site]:.5f}  {mc.masses[site]:.5f}")
gap = np.max(np.abs(exact.masses - mc.masses))
print(f"largest per-site gap: {gap:.2e} (shrinks like 1/sqrt(paths))")

print()
print("== killing at the boundary ==")
hot = BoundaryParams(n=n, alpha=0.5, beta=0.5, A=3.0, B=1.0)
for tt in (0.1, 0.5, 1.0):
    law = distribution_at(hot, x0, tt, M)
    print(f"t = {tt:4.1f}: cemetery mass {law.atom_delta:.4f}")
