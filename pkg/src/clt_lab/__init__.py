"""Negligibility, Lindeberg and uniform-integrability diagnostics for triangular arrays."""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    ContinuousDist,
    LatticeDist,
    centered_bernoulli,
    lattice_uniform,
    rademacher,
)
from .schemes import Scheme, builtin_scheme, row_meta  # noqa: E402
from .diagnostics import (  # noqa: E402
    chebyshev_chain_check,
    lindeberg_sum,
    negligibility_individual,
    negligibility_joint,
)
from .gaussfit import GaussianParams, classify, fit_sigma2, gaussian_cdf  # noqa: E402
from .exact import convolve_row, ks_distance, second_moment, ui_tail_exact  # noqa: E402
from .montecarlo import empirical_ks, empirical_ui_tail, sample_sums  # noqa: E402
from .config import ExperimentConfig, load_config, parse_config  # noqa: E402
from .report import emit, run  # noqa: E402
