"""Exact law of the normalized row sum for lattice rows.

Members are placed on the common integer lattice of the row and convolved:
identical members by repeated squaring, distinct groups by a balanced binary
merge.  Convolution is direct, block by block: runs of non-zero mass
separated by long zero gaps are convolved pairwise, so rows whose law splits
into widely separated bands stay cheap.  Only products too large for direct
work fall back to the FFT.

Underflow hygiene: after each convolution, entries below the clamp floor are
set to zero and their mass is accumulated in ``clamped_mass``.  The floor is
``max(1e-300, 1e-16 / (x2_max * cap))``, where ``x2_max`` is the largest
possible squared normalized value of the row; this bounds the effect of all
clamping on the second moment by about ``1e-14``.  FFT results are
additionally cut at their round-off floor
``8 * eps * log2(N) * ||a||_2 * ||b||_2``.  Leading and trailing zeros are
trimmed, and the support cap applies to the stored arrays.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.signal import fftconvolve

from .distributions import LatticeDist
from .gaussfit import STANDARD, GaussianParams, gaussian_cdf
from .schemes import RowMeta

SUPPORT_CAP = 2 ** 24
UNDERFLOW = 1e-300
MOMENT_BUDGET = 1e-16
DIRECT_MAX_WORK = 2 ** 30
BLOCK_GAP = 64
FFT_FLOOR_FACTOR = 8.0


class ExactEngineError(RuntimeError):
    pass


class SupportCapExceeded(ExactEngineError):
    pass


class LatticeIncompatible(ExactEngineError):
    pass


@dataclass
class _Dense:
    lo: int
    p: np.ndarray


@dataclass
class _Audit:
    floor: float = UNDERFLOW
    clamped_mass: float = 0.0
    max_support: int = 0
    fft_calls: int = 0
    direct_calls: int = 0


def _trim(lo: int, p: np.ndarray) -> _Dense:
    nz = np.flatnonzero(p)
    if nz.size == 0:
        raise ExactEngineError("all probability mass underflowed")
    return _Dense(lo + int(nz[0]), p[nz[0]:nz[-1] + 1])


def _leaf(u: LatticeDist) -> _Dense:
    if u.step.denominator != 1:
        raise LatticeIncompatible("member step is not an integer multiple of the common step")
    k = u.indices * int(u.step)
    lo = int(k[0])
    p = np.zeros(int(k[-1]) - lo + 1)
    p[k - lo] = u.probs
    return _Dense(lo, p)


def _check_cap(length: int, cap: int, audit: _Audit) -> None:
    if length > cap:
        raise SupportCapExceeded(
            f"support of {length} lattice points exceeds the cap of {cap}; use mode 'mc'"
        )
    audit.max_support = max(audit.max_support, length)


def _blocks(p: np.ndarray) -> list[tuple[int, int]]:
    nz = np.flatnonzero(p)
    cut = np.flatnonzero(np.diff(nz) > BLOCK_GAP)
    starts = np.concatenate(([nz[0]], nz[cut + 1]))
    ends = np.concatenate((nz[cut], [nz[-1]])) + 1
    return list(zip(starts.tolist(), ends.tolist()))


def _convolve(a: _Dense, b: _Dense, audit: _Audit, cap: int, method: str) -> _Dense:
    length = a.p.size + b.p.size - 1
    _check_cap(length, cap, audit)
    ba, bb = _blocks(a.p), _blocks(b.p)
    work = sum(e - s for s, e in ba) * sum(e - s for s, e in bb)
    use_fft = method == "fft" or (method == "auto" and work > DIRECT_MAX_WORK)
    floor = audit.floor
    if use_fft:
        audit.fft_calls += 1
        out = fftconvolve(a.p, b.p)
        floor = max(floor, FFT_FLOOR_FACTOR * np.finfo(float).eps * math.log2(max(length, 2))
                    * float(np.linalg.norm(a.p)) * float(np.linalg.norm(b.p)))
    else:
        audit.direct_calls += 1
        out = np.zeros(length)
        for sa, ea in ba:
            for sb, eb in bb:
                out[sa + sb:ea + eb - 1] += np.convolve(a.p[sa:ea], b.p[sb:eb])
    small = out < floor
    if small.any():
        audit.clamped_mass += float(np.abs(out[small]).sum())
        out[small] = 0.0
    return _trim(a.lo + b.lo, out)


def _power(x: _Dense, count: int, audit: _Audit, cap: int, method: str) -> _Dense:
    result = None
    base = x
    while True:
        if count & 1:
            result = base if result is None else _convolve(result, base, audit, cap, method)
        count >>= 1
        if not count:
            return result
        base = _convolve(base, base, audit, cap, method)


def _merge(parts: list[_Dense], audit: _Audit, cap: int, method: str) -> _Dense:
    while len(parts) > 1:
        nxt = [_convolve(parts[i], parts[i + 1], audit, cap, method)
               for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def clamp_floor(members: Sequence[LatticeDist], cap: int = SUPPORT_CAP) -> float:
    """Entry-wise clamp threshold keeping the second-moment error below ~1e-14."""
    var = math.fsum(u.variance() for u in members)
    lo = math.fsum(float(u.values[0]) for u in members)
    hi = math.fsum(float(u.values[-1]) for u in members)
    if not var > 0:
        return UNDERFLOW
    x2_max = max(lo * lo, hi * hi) / var
    return max(UNDERFLOW, MOMENT_BUDGET / (max(x2_max, 1.0) * cap))


def convolve_members(members: Sequence[LatticeDist], *, grouped: bool = True,
                     cap: int = SUPPORT_CAP, method: str = "auto") -> tuple[int, np.ndarray, _Audit]:
    """Law of the sum of integer-lattice members: ``(lowest index, pmf, audit)``.

    With ``grouped`` identical member objects are combined by repeated
    squaring; otherwise members are merged pairwise in the given order.
    """
    audit = _Audit(floor=clamp_floor(members, cap))
    if grouped:
        counts: dict[int, list] = {}
        for u in members:
            counts.setdefault(id(u), [u, 0])[1] += 1
        parts = [_power(_leaf(u), c, audit, cap, method) for u, c in counts.values()]
        parts.sort(key=lambda d: d.p.size)
    else:
        parts = [_leaf(u) for u in members]
    for part in parts:
        _check_cap(part.p.size, cap, audit)
    total = _merge(parts, audit, cap, method)
    return total.lo, total.p, audit


@dataclass(frozen=True, eq=False)
class NormalizedPmf:
    """Lattice law with atoms at ``scale * (lo + i) + offset`` and masses ``probs[i]``."""

    scale: float
    offset: float
    lo: int
    probs: np.ndarray
    n: int = 0
    DS_n: float = float("nan")
    clamped_mass: float = 0.0
    max_support: int = 0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def values_of(self, index) -> np.ndarray:
        return np.asarray(index) * self.scale + self.offset

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.lo + self.probs.size, dtype=np.int64)

    @property
    def x(self) -> np.ndarray:
        return self.values_of(self.indices)

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        """Points with positive mass and their masses."""
        nz = np.flatnonzero(self.probs)
        return self.values_of(self.lo + nz), self.probs[nz]

    def total_mass(self) -> float:
        return math.fsum(self.probs)

    def mean(self) -> float:
        x, p = self.atoms()
        return math.fsum(x * p)

    def second_moment(self) -> float:
        return second_moment(self)

    def cdf(self, x) -> np.ndarray:
        xs, p = self.atoms()
        c = np.cumsum(p)
        pos = np.searchsorted(xs, np.asarray(x, dtype=float), side="right")
        return np.where(pos > 0, c[np.maximum(pos - 1, 0)], 0.0)

    def quantile(self, q: float) -> float:
        xs, p = self.atoms()
        c = np.cumsum(p)
        i = int(np.searchsorted(c, q * c[-1], side="left"))
        return float(xs[min(i, xs.size - 1)])

    def ks(self, g: GaussianParams = STANDARD) -> float:
        return ks_distance(self, g)

    def ui_tail(self, C: float) -> float:
        return ui_tail_exact(self, C)


def convolve_row(meta: RowMeta, cap: int = SUPPORT_CAP, method: str = "auto") -> NormalizedPmf:
    """Exact law of ``S_n / sqrt(DS_n)`` for a lattice-compatible row."""
    if not meta.lattice_compatible:
        raise LatticeIncompatible(f"row {meta.n} is not lattice compatible; use mode 'mc'")
    lo, p, audit = convolve_members(meta.unit_members, cap=cap, method=method)
    scale = 1.0 / meta.unit_sd
    return NormalizedPmf(
        scale=scale,
        offset=float(meta.unit_offset) * scale,
        lo=lo,
        probs=p,
        n=meta.n,
        DS_n=meta.DS_n,
        clamped_mass=audit.clamped_mass,
        max_support=audit.max_support,
    )


def second_moment(p: NormalizedPmf) -> float:
    x, q = p.atoms()
    return math.fsum(x * x * q)


def ui_tail_exact(p: NormalizedPmf, C: float) -> float:
    """``E[X^2 ; X^2 > C]`` for ``X`` with law ``p``."""
    if not C > 0:
        raise ValueError("C must be positive")
    x, q = p.atoms()
    x2 = x * x
    mask = x2 > C
    return math.fsum(x2[mask] * q[mask])


def ks_distance(p: NormalizedPmf, g: GaussianParams = STANDARD) -> float:
    """Exact sup-distance between the lattice CDF and ``Phi_{a, sigma^2}``.

    The supremum over the line is attained at a jump, either at the jump
    value or at its left limit.
    """
    x, q = p.atoms()
    F = np.cumsum(q)
    F_left = F - q
    phi = gaussian_cdf(x, g)
    return float(max(np.max(np.abs(F - phi)), np.max(np.abs(F_left - phi))))


def write_pmf_csv(p: NormalizedPmf, path: str | Path) -> None:
    """Dump ``x, pmf, cdf`` rows for the positive-mass atoms, ascending in ``x``."""
    x, q = p.atoms()
    F = np.cumsum(q)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "pmf", "cdf"])
        for row in zip(x.tolist(), q.tolist(), F.tolist()):
            w.writerow([repr(v) for v in row])
