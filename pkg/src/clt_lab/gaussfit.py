"""Gaussian distribution function, variance fitting and the trichotomy verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

Z75 = float(ndtri(0.75))
GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class GaussianParams:
    a: float = 0.0
    sigma2: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError("Gaussian variance must be positive")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


STANDARD = GaussianParams(0.0, 1.0)


def gaussian_cdf(x, g: GaussianParams = STANDARD):
    """``Phi_{a, sigma^2}(x)``, vectorized."""
    z = (np.asarray(x, dtype=float) - g.a) / g.sigma
    out = ndtr(z)
    return float(out) if np.ndim(out) == 0 else out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def gaussian_cdf_quadrature(x: float, g: GaussianParams = STANDARD, panel: float = 0.25) -> float:
    """Slow reference: integrate the Gaussian density from the mean to ``x``.

    Composite 20-point Gauss-Legendre on panels of width ``panel`` (in units
    of sigma).  Used only to validate :func:`gaussian_cdf`.
    """
    z = (float(x) - g.a) / g.sigma
    m = max(1, math.ceil(abs(z) / panel))
    edges = np.linspace(0.0, abs(z), m + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    t = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    dens = np.exp(-t * t / 2) / math.sqrt(2 * math.pi)
    integral = math.fsum((half[:, None] * _GL_WEIGHTS[None, :] * dens).ravel())
    return 0.5 + math.copysign(integral, z)


class LawAccessor(Protocol):
    """What :func:`fit_sigma2` needs from a law: quantiles and KS distances."""

    def quantile(self, q: float) -> float: ...

    def ks(self, g: GaussianParams) -> float: ...


class FitError(ValueError):
    """Raised when the law has zero interquartile range (verdict: Inconclusive)."""


@dataclass(frozen=True)
class FitResult:
    sigma2: float
    ks_at_fit: float
    sigma2_seed: float
    grid_sigma2: tuple
    grid_ks: tuple

    @property
    def min_grid_ks(self) -> float:
        return min(self.grid_ks)


def fit_sigma2(law: LawAccessor, grid_points: int = 33, iters: int = 48) -> FitResult:
    """Fit ``sigma^2`` of a centered Gaussian to ``law`` by minimizing KS.

    Seed from the interquartile range, scan a log grid over
    ``[seed/4, 4*seed]``, then golden-section search (in ``log sigma^2``)
    between the neighbours of the best grid point.
    """
    iqr = law.quantile(0.75) - law.quantile(0.25)
    if not iqr > 0:
        raise FitError("zero interquartile range")
    seed = (iqr / (2 * Z75)) ** 2
    logs = np.linspace(math.log(seed / 4), math.log(seed * 4), grid_points)
    ks = [law.ks(GaussianParams(0.0, math.exp(v))) for v in logs]
    best = int(np.argmin(ks))
    lo = logs[max(best - 1, 0)]
    hi = logs[min(best + 1, grid_points - 1)]

    def f(v):
        return law.ks(GaussianParams(0.0, math.exp(v)))

    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    candidates = [(fc, c), (fd, d), (ks[best], logs[best])]
    kbest, vbest = min(candidates)
    return FitResult(
        sigma2=math.exp(vbest),
        ks_at_fit=kbest,
        sigma2_seed=seed,
        grid_sigma2=tuple(math.exp(v) for v in logs),
        grid_ks=tuple(ks),
    )


# Verdicts.

CLT = "CLT"
GAUSSIAN_NONSTANDARD = "GaussianNonStandard"
NON_GAUSSIAN = "NonGaussian"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Thresholds:
    tau_neg: float = 0.02
    tau_ui: float = 0.02
    tau_ks: float = 0.02
    tau_sigma: float = 0.02

    def ks_limit(self, dkw_band: float | None = None) -> float:
        """MC evidence is judged against ``max(tau_ks, 2 * dkw_band)``."""
        if dkw_band is None:
            return self.tau_ks
        return max(self.tau_ks, 2 * dkw_band)


@dataclass(frozen=True)
class Evidence:
    """Summary of one row at the smallest eps and the largest C."""

    n: int
    neg_joint: float
    lindeberg: float
    ui_tail: float
    ks_standard: float
    ks_at_fit: float | None = None
    sigma2_hat: float | None = None
    dkw_band: float | None = None


@dataclass(frozen=True)
class Verdict:
    tag: str
    sigma2_hat: float | None = None
    reason: str = ""
    evidence: tuple = field(default=())


def classify(evidence: Sequence[Evidence], thresholds: Thresholds = Thresholds()) -> Verdict:
    """Place an experiment in one branch of the trichotomy.

    Decided at the largest ``n``: CLT needs joint negligibility, a small
    uniform-integrability tail and a small KS distance to the standard
    Gaussian; GaussianNonStandard needs joint negligibility and a good
    Gaussian fit whose variance is clearly not one; NonGaussian means no
    Gaussian fits well.
    """
    ev = tuple(sorted(evidence, key=lambda e: e.n))
    if not ev:
        return Verdict(INCONCLUSIVE, reason="no evidence", evidence=ev)
    last = ev[-1]
    tks = thresholds.ks_limit(last.dkw_band)
    if len(ev) < 3:
        # too few rows to see a trend; only a failed fit can be decided
        if last.ks_at_fit is not None and last.ks_at_fit > tks:
            return Verdict(NON_GAUSSIAN, last.sigma2_hat, "no Gaussian law fits at the largest n", ev)
        return Verdict(INCONCLUSIVE, last.sigma2_hat, "fewer than 3 rows of evidence", ev)
    neg_ok = last.neg_joint >= 1 - thresholds.tau_neg
    if neg_ok and last.ui_tail <= thresholds.tau_ui and last.ks_standard <= tks:
        return Verdict(CLT, last.sigma2_hat,
                       "joint negligibility, small UI tail, KS to Phi_{0,1} within tolerance", ev)
    if last.ks_at_fit is None or last.sigma2_hat is None:
        return Verdict(INCONCLUSIVE, reason="no Gaussian fit at the largest n", evidence=ev)
    if neg_ok and last.ks_at_fit <= tks and abs(last.sigma2_hat - 1) > 3 * thresholds.tau_sigma:
        return Verdict(GAUSSIAN_NONSTANDARD, last.sigma2_hat,
                       "joint negligibility and a Gaussian fit with variance away from 1", ev)
    if last.ks_at_fit > tks:
        return Verdict(NON_GAUSSIAN, last.sigma2_hat, "no Gaussian law fits at the largest n", ev)
    return Verdict(INCONCLUSIVE, last.sigma2_hat, "no branch condition met", ev)
