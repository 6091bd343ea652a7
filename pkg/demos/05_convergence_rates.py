"""Measuring how fast the walk law approaches its limit.

The distance d(mu, nu) is a weighted series of clipped discrepancies
|integral f_{k,j} d(mu - nu)| over the test-function family; it metrizes
vague convergence of sub-probability laws and carries an exact truncation
bound.  Running it down an n ladder and fitting the log-log slope recovers
the predicted Berry-Esseen-type exponent for each regime.

This demo uses a short ladder and a small family so it finishes in about a
minute; the acceptance suite runs the full ladders.
"""

import numpy as np

from halfline.limits import closed_form_law, params_to_limit
from halfline.metric import (
    distance_d,
    run_killed_ladder,
    run_rate_ladder,
    sample_to_lattice,
)
from halfline.testfunctions import build_family
from halfline.metric import SubMeasure

LADDER = (10, 20, 50, 100)

print("== the metric itself ==")
mixed = params_to_limit(2.0, 1.0, 1.0, 1.0)
family = build_family(mixed, K=8, J=8)
ref = closed_form_law(params_to_limit(3.0, 0.5, 1.0, 1.0), 1.0, 0.5)
mu = SubMeasure.from_continuous(ref)
for n in (25, 50, 100):
    nu = SubMeasure.from_lattice(sample_to_lattice(ref, n))
    value, bound = distance_d(mu, nu, family)
    print(f"law vs itself read on the 1/{n:3d} lattice: "
          f"d = {value:.2e} (truncation bound {bound:.1e})")

print()
print("== rate ladder, mixed regime ==")
report = run_rate_ladder(2.0, 1.0, 1.0, 1.0, t=0.5, u=1.0,
                         n_values=LADDER, K=8, J=8, threads=4)
print(report.summary())

print()
print("== rate ladder, exponential-holding with beta in (1, 2] ==")
report = run_rate_ladder(2.0, 1.5, 1.0, 1.0, t=0.5, u=1.0,
                         n_values=LADDER, K=8, J=8, threads=4)
print(report.summary())

print()
print("== killed regime: shifted walk against the killed law ==")
report = run_killed_ladder(0.0, 0.0, 1.0, 1.0, t=0.5, u=1.0,
                           n_values=LADDER, K=8, J=8, threads=4)
print(report.summary())
