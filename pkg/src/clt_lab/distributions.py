"""Centered single-variable laws: finite lattice laws and three continuous families.

Lattice values are exact rationals ``step * index + offset``; probabilities are
floats.  Every law is centered (mean zero) and immutable once built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Mapping, Union

import numpy as np
from scipy.special import erfc

Convention = Literal[">=", ">"]

PROB_TOL = 1e-12
MEAN_TOL = 1e-12


class DistributionError(ValueError):
    """Raised for invalid distribution parameters."""


def to_fraction(value) -> Fraction:
    """Convert ``"p/q"`` strings, ints, floats or Fractions to an exact Fraction.

    Floats go through their shortest decimal repr, so ``0.3`` becomes ``3/10``
    rather than the nearest binary fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DistributionError(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DistributionError(f"not a finite number: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DistributionError(f"bad rational string {value!r}") from exc
    raise DistributionError(f"not a rational number: {value!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LatticeDist:
    """Finite-support law on ``{step * i + offset}``.

    ``indices`` are sorted, unique and carry strictly positive probability.
    Use :meth:`from_mapping` to build one from an ``{index: prob}`` dict.
    """

    step: Fraction
    offset: Fraction
    indices: np.ndarray
    probs: np.ndarray
    name: str = ""
    _degenerate_ok: bool = field(default=False, repr=False)

    def __post_init__(self):
        step = to_fraction(self.step)
        offset = to_fraction(self.offset)
        if step <= 0:
            raise DistributionError("lattice step must be positive")
        idx = np.asarray(self.indices, dtype=np.int64)
        p = np.asarray(self.probs, dtype=np.float64)
        if idx.ndim != 1 or idx.shape != p.shape or idx.size == 0:
            raise DistributionError("indices and probs must be non-empty 1-D arrays of equal length")
        if np.any(np.diff(idx) <= 0):
            raise DistributionError("indices must be strictly increasing")
        if np.any(~np.isfinite(p)) or np.any(p < 0):
            raise DistributionError("probabilities must be finite and non-negative")
        keep = p > 0
        idx, p = idx[keep].copy(), p[keep].copy()
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise DistributionError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "indices", _frozen(idx))
        object.__setattr__(self, "probs", _frozen(p))
        object.__setattr__(self, "_values", _frozen(
            np.array([float(step * int(i) + offset) for i in idx])))

        x = self.values
        scale = max(1.0, float(np.max(np.abs(x))))
        mean = float(np.dot(p, x))
        if abs(mean) > MEAN_TOL * scale:
            raise DistributionError(f"distribution is not centered (mean {mean!r})")
        if self.variance() == 0.0 and not self._degenerate_ok:
            raise DistributionError(
                "zero-variance law; use LatticeDist.degenerate() for the point mass at 0"
            )

    @classmethod
    def from_mapping(cls, step, offset, probs: Mapping[int, float], name: str = "") -> "LatticeDist":
        acc: dict[int, float] = {}
        for i, q in probs.items():
            acc[int(i)] = acc.get(int(i), 0.0) + float(q)
        keys = sorted(acc)
        return cls(to_fraction(step), to_fraction(offset), np.array(keys, dtype=np.int64),
                   np.array([acc[k] for k in keys]), name=name)

    @classmethod
    def degenerate(cls) -> "LatticeDist":
        """The point mass at 0, allowed only through this constructor."""
        return cls(Fraction(1), Fraction(0), np.array([0]), np.array([1.0]),
                   name="degenerate", _degenerate_ok=True)

    @property
    def is_degenerate(self) -> bool:
        return self.indices.size == 1

    @property
    def values(self) -> np.ndarray:
        """Support points as floats (each rounded once from its exact rational)."""
        return self._values

    def mapping(self) -> dict[int, float]:
        return {int(i): float(q) for i, q in zip(self.indices, self.probs)}

    def mean(self) -> float:
        return float(np.dot(self.probs, self.values))

    def variance(self) -> float:
        x = self.values
        return float(np.dot(self.probs, x * x))

    def tail_prob(self, t: float, strict: Convention = ">=") -> float:
        ax = np.abs(self.values)
        mask = ax > t if strict == ">" else ax >= t
        return float(self.probs[mask].sum())

    def truncated_second_moment(self, t: float, strict: Convention = ">") -> float:
        x = self.values
        ax = np.abs(x)
        mask = ax > t if strict == ">" else ax >= t
        return float(np.dot(self.probs[mask], x[mask] ** 2))

    def scaled(self, c) -> "LatticeDist":
        c = to_fraction(c)
        if c <= 0:
            raise DistributionError("scale factor must be positive")
        return LatticeDist(self.step * c, self.offset * c, self.indices, self.probs,
                           name=self.name, _degenerate_ok=self._degenerate_ok)

    def cdf_table(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c

    def sample_positions(self, rng: np.random.Generator, size) -> np.ndarray:
        """Positions into ``indices`` drawn by inverse-CDF table lookup."""
        u = rng.random(size)
        pos = np.searchsorted(self.cdf_table(), u, side="right")
        return np.minimum(pos, self.indices.size - 1)

    def sample(self, rng: np.random.Generator, size=None):
        pos = self.sample_positions(rng, size)
        if size is None:
            return float(self.values[int(pos)])
        return self.values[pos]

    def describe(self) -> dict:
        return {"lattice": {
            "step": str(self.step),
            "offset": str(self.offset),
            "probs": {str(k): v for k, v in self.mapping().items()},
        }}


FAMILIES = ("gaussian", "uniform", "exponential")


@dataclass(frozen=True)
class ContinuousDist:
    """Centered continuous law with closed-form tails.

    ``gaussian``: ``param`` is the variance.  ``uniform``: ``param`` is the
    half-width of the support ``[-h, h]``.  ``exponential``: ``param`` is the
    rate ``r`` of ``Exp(r) - 1/r``.
    """

    family: str
    param: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DistributionError(f"unknown continuous family {self.family!r}")
        p = float(self.param)
        if not (math.isfinite(p) and p > 0):
            raise DistributionError(f"{self.family} parameter must be positive and finite")
        object.__setattr__(self, "param", p)

    @property
    def name(self) -> str:
        return f"{self.family}({self.param!r})"

    def mean(self) -> float:
        return 0.0

    def variance(self) -> float:
        if self.family == "gaussian":
            return self.param
        if self.family == "uniform":
            return self.param ** 2 / 3.0
        return 1.0 / self.param ** 2

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "gaussian":
            return np.exp(-x * x / (2 * self.param)) / math.sqrt(2 * math.pi * self.param)
        if self.family == "uniform":
            return np.where(np.abs(x) <= self.param, 0.5 / self.param, 0.0)
        r = self.param
        return np.where(x >= -1.0 / r, r * np.exp(-r * x - 1.0), 0.0)

    def tail_prob(self, t: float, strict: Convention = ">=") -> float:
        # No atoms, so the boundary convention is immaterial.
        t = float(t)
        if self.family == "gaussian":
            return float(erfc(t / math.sqrt(2 * self.param)))
        if self.family == "uniform":
            return max(0.0, 1.0 - t / self.param)
        r = self.param
        upper = math.exp(-1.0 - r * t)
        lower = -math.expm1(r * t - 1.0) if r * t < 1.0 else 0.0
        return upper + lower

    def truncated_second_moment(self, t: float, strict: Convention = ">") -> float:
        t = float(t)
        if self.family == "gaussian":
            s = math.sqrt(self.param)
            z = t / s
            phi = math.exp(-z * z / 2) / math.sqrt(2 * math.pi)
            return self.param * (2 * z * phi + float(erfc(z / math.sqrt(2))))
        if self.family == "uniform":
            h = self.param
            return (h ** 3 - t ** 3) / (3 * h) if t < h else 0.0
        r = self.param

        def anti(y):
            # antiderivative of y^2 r exp(-r y)
            return -math.exp(-r * y) * (y * y + 2 * y / r + 2 / r ** 2)

        upper = math.exp(-1.0 - r * t) * (t * t + 2 * t / r + 2 / r ** 2)
        lower = 0.0
        if r * t < 1.0:
            lower = math.exp(-1.0) * (anti(-t) - anti(-1.0 / r))
        return upper + lower

    def scaled(self, c) -> "ContinuousDist":
        c = float(to_fraction(c))
        if c <= 0:
            raise DistributionError("scale factor must be positive")
        if self.family == "gaussian":
            return ContinuousDist("gaussian", self.param * c * c)
        if self.family == "uniform":
            return ContinuousDist("uniform", self.param * c)
        return ContinuousDist("exponential", self.param / c)

    def sample(self, rng: np.random.Generator, size=None):
        if self.family == "gaussian":
            return rng.standard_normal(size) * math.sqrt(self.param)
        if self.family == "uniform":
            return rng.uniform(-self.param, self.param, size)
        return rng.standard_exponential(size) / self.param - 1.0 / self.param

    def describe(self) -> dict:
        key = {"gaussian": "sigma2", "uniform": "half_width", "exponential": "rate"}[self.family]
        return {"continuous": {"family": self.family, key: self.param}}


Distribution = Union[LatticeDist, ContinuousDist]


# Module-level operations, usable on either variant.

def variance(d: Distribution) -> float:
    return d.variance()


def tail_prob(d: Distribution, t: float, strict: Convention = ">=") -> float:
    """``P(|X| >= t)`` or ``P(|X| > t)`` depending on ``strict``."""
    if t < 0:
        raise DistributionError("threshold must be non-negative")
    return d.tail_prob(t, strict)


def truncated_second_moment(d: Distribution, t: float, strict: Convention = ">") -> float:
    """``E[X^2 1{|X| > t}]`` (or with ``>=``)."""
    if t < 0:
        raise DistributionError("threshold must be non-negative")
    return d.truncated_second_moment(t, strict)


def sample(d: Distribution, rng: np.random.Generator, size=None):
    return d.sample(rng, size)


# Common constructors.

def rademacher(scale=1) -> LatticeDist:
    return LatticeDist.from_mapping(scale, 0, {-1: 0.5, 1: 0.5}, name="rademacher")


def centered_bernoulli(p) -> LatticeDist:
    """Bernoulli(p) minus p: values ``-p`` and ``1 - p``."""
    p = to_fraction(p)
    if not 0 < p < 1:
        raise DistributionError("Bernoulli parameter must lie in (0, 1)")
    return LatticeDist.from_mapping(1, -p, {0: float(1 - p), 1: float(p)},
                                    name=f"centered-bernoulli({p})")


def lattice_uniform(m: int, step=1) -> LatticeDist:
    """Uniform law on ``{-m, ..., m} * step``."""
    if m < 1:
        raise DistributionError("lattice uniform needs m >= 1")
    w = 1.0 / (2 * m + 1)
    return LatticeDist.from_mapping(step, 0, {i: w for i in range(-m, m + 1)},
                                    name=f"lattice-uniform({m})")


def from_config(cfg: Mapping) -> Distribution:
    """Build a distribution from its JSON form.

    ``{"lattice": {"step": "1/2", "offset": "0", "probs": {"-1": 0.5, "1": 0.5}}}``,
    ``{"continuous": {"family": "gaussian", "sigma2": 1.0}}`` or
    ``{"degenerate": true}``.
    """
    if not isinstance(cfg, Mapping) or len(cfg) != 1:
        raise DistributionError("distribution must be an object with exactly one of "
                                "'lattice', 'continuous', 'degenerate'")
    (kind, body), = cfg.items()
    if kind == "degenerate":
        return LatticeDist.degenerate()
    if kind == "lattice":
        if not isinstance(body, Mapping) or "probs" not in body:
            raise DistributionError("lattice distribution needs 'probs'")
        probs = body["probs"]
        if not isinstance(probs, Mapping) or not probs:
            raise DistributionError("'probs' must be a non-empty object")
        try:
            mapping = {int(k): float(v) for k, v in probs.items()}
        except (TypeError, ValueError) as exc:
            raise DistributionError("'probs' keys must be integers and values numbers") from exc
        return LatticeDist.from_mapping(body.get("step", 1), body.get("offset", 0), mapping)
    if kind == "continuous":
        if not isinstance(body, Mapping):
            raise DistributionError("continuous distribution must be an object")
        family = body.get("family")
        key = {"gaussian": "sigma2", "uniform": "half_width", "exponential": "rate"}.get(family)
        if key is None:
            raise DistributionError(f"unknown continuous family {family!r}")
        if key not in body:
            raise DistributionError(f"{family} distribution needs '{key}'")
        return ContinuousDist(family, body[key])
    raise DistributionError(f"unknown distribution kind {kind!r}")
