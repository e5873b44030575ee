"""
Negligibility and the Lindeberg sum
===================================

Four built-in arrays, four behaviours.  Individual negligibility looks at the
worst single term; joint negligibility is the product over the row.
"""

from clt_lab.diagnostics import (
    chebyshev_chain_check,
    lindeberg_sum,
    negligibility_individual,
    negligibility_joint,
)
from clt_lab.schemes import builtin_scheme

schemes = {
    "iid": builtin_scheme("iid"),
    "poisson-bernoulli": builtin_scheme("poisson-bernoulli", {"lambda": 1}),
    "variance-escape": builtin_scheme("variance-escape"),
    "dominant-term": builtin_scheme("dominant-term"),
}

eps = 0.5
print(f"{'scheme':18s} {'n':>6s} {'L_n':>9s} {'neg_ind':>9s} {'neg_joint':>9s}")
for name, s in schemes.items():
    for n in (100, 1000, 10000):
        print(f"{name:18s} {n:6d} {lindeberg_sum(s, n, eps):9.5f} "
              f"{negligibility_individual(s, n, eps):9.5f} {negligibility_joint(s, n, eps):9.5f}")

# Poisson-Bernoulli: every term is small, yet the row as a whole is not
# negligible; joint negligibility tends to exp(-1)

# the union bound and Chebyshev: lhs <= mid <= rhs
for name, s in schemes.items():
    c = chebyshev_chain_check(s, 100, eps)
    print(f"{name:18s} chain {c.lhs:.5f} <= {c.mid:.5f} <= {c.rhs:.5f}")
