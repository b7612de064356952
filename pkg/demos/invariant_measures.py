# Invariant measures of one-dimensional reflected walks, three ways:
# the closed form, the brute-force kernel, and a long simulation.
#
# The walk is X_{n+1} = |X_n - Y_{n+1}| with nonnegative integer increments.
# Its invariant measure is explicit:
#     nu(0) = (1 - mu(0)) / 2,   nu(x) = mu(x)/2 + mu((x, inf))  for x >= 1,
# with total mass E(Y).

import numpy as np

from reflectwalk import (JointMeasure, Measure1D, WalkSpec,
                         invariant_measure_nonneg, reflected_kernel_matrix)
from reflectwalk.diagnostics import occupation_vs_invariant

mu = Measure1D.lattice({1: 0.5, 2: 0.5})
nu = invariant_measure_nonneg(mu)
print("increment law:", mu.atoms_dict())
print("invariant measure:", nu.as_dict(), "total mass:", nu.total_mass)

# Cross-check against the explicit transition matrix on {0, 1, 2}:
# p(x, 0) = mu(x) and p(x, y) = mu(x - y) + mu(x + y) for y >= 1.
P = reflected_kernel_matrix(mu)
v = nu.masses
print("kernel:\n", P)
print("balance residual |nu P - nu|:", np.abs(v @ P - v).max())

# A long trajectory spends time on the attractor {0, 1, 2} in the same
# proportions (0.5 : 0.75 : 0.25) / 1.5 -- one third, one half, one sixth.
spec = WalkSpec(JointMeasure.product((1, 0, 0, 0), [mu]))
tv, occupation = occupation_vs_invariant(spec, nu, steps=200_000,
                                         burn_in=5_000, rng=7)
total = sum(occupation.values())
print("empirical occupation:",
      {k: round(c / total, 4) for k, c in sorted(occupation.items())})
print("total variation distance to nu/mass:", round(tv, 5))

# The continuous analogue: uniform increments on [0, 1] give the triangular
# density mu((x, inf)) = 1 - x with mass E(Y) = 1/2.
from reflectwalk import uniform

nu_u = invariant_measure_nonneg(uniform(0, 1))
print("uniform[0,1]: mass =", round(nu_u.total_mass, 6),
      "density at 0.25 =", nu_u.density(0.25))
