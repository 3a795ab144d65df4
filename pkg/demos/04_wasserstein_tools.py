"""
Exact W2 between point clouds
=============================

Uniform empirical measures of equal size are matched by an assignment
problem. Unequal sizes become a transportation problem with integer supplies,
so the optimal plan has masses that are exact multiples of 1/(n m). The
column-conditional laws of the plan give the sampler used in coupling
arguments: mixing the columns recovers the source measure exactly.
"""

import numpy as np

from kacsim.transport import pi_sampler, w2_exact, w2_squared

rng = np.random.default_rng(1)
x = rng.normal(size=(6, 3))
y = rng.normal(size=(6, 3)) + [1.0, 0.0, 0.0]

print("W2^2(x, x)      =", w2_squared(x, x))
print("W2^2(x, x + d)  =", w2_squared(x, x + [0.0, 3.0, 4.0]), "(|d|^2 = 25)")
print("W2^2(x, y)      =", w2_squared(x, y))

w = rng.normal(size=(10, 3))
plan = w2_exact(x, w)
plan.check_feasible()
print("6 -> 10 points: cost", plan.cost)
print("plan masses:", sorted(set(plan.rational_masses())))

s = pi_sampler(plan)
print("source marginal from columns:", s.source_marginal_exact())
print("displacement", s.displacement(), "equals cost", plan.cost)
print("three draws given target 0:\n", s.sample(0, rng, size=3))
