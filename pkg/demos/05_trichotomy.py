"""
The trichotomy
==============

Run an experiment per built-in over an n-grid and read off the verdict.  The
same runs are available from the command line with ``clt-lab run``.
"""

from clt_lab.config import parse_config
from clt_lab.report import run

cases = [
    ({"name": "iid"}, [256, 1024, 4096]),
    ({"name": "variance-escape"}, [128, 512, 2048]),
    ({"name": "poisson-bernoulli", "lambda": 1}, [100, 1000, 10000]),
    ({"name": "dominant-term"}, [256, 1024, 4096]),
]

for scheme, grid in cases:
    report = run(parse_config({"scheme": scheme, "n_grid": grid, "mode": "exact"}))
    last = report.rows[-1]
    ev = report.verdict.evidence[-1]
    print(f"{scheme['name']:18s} {report.verdict.tag:20s} "
          f"neg_joint {ev.neg_joint:.4f}  T(C_max) {ev.ui_tail:.4f}  "
          f"KS {ev.ks_standard:.4f}  sigma2_hat {last.fit.sigma2:.4f}")
    print(f"{'':18s} {report.verdict.reason}")
