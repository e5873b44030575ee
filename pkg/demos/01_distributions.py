"""
Centered laws and their tails
=============================

Lattice laws carry exact rational support; continuous laws have closed-form
tails.  Boundary conventions are explicit per call.
"""

import numpy as np

from clt_lab.distributions import ContinuousDist, centered_bernoulli, rademacher

r = rademacher()
print("Rademacher variance:", r.variance())

# an atom exactly on the threshold counts for ">=" but not for ">"
print("P(|X| >= 1) =", r.tail_prob(1, ">="), "  P(|X| > 1) =", r.tail_prob(1, ">"))

b = centered_bernoulli(0.1)
print("centered Bernoulli(0.1): support", b.values, "variance", b.variance())
print("E[X^2; |X| > 0.5] =", b.truncated_second_moment(0.5))

# continuous families: tails in closed form
for d in (ContinuousDist("gaussian", 1.0), ContinuousDist("uniform", 1.0),
          ContinuousDist("exponential", 1.0)):
    ts = np.array([0.5, 1.0, 2.0])
    print(f"{d.name:18s} P(|X|>=t):", np.round([d.tail_prob(t) for t in ts], 5))

# sampling is driven by a caller-owned generator
rng = np.random.default_rng(2026)
print("mean of 10^6 Rademacher draws:", r.sample(rng, 10 ** 6).mean())
