"""Row diagnostics: Lindeberg sums, negligibility of the terms, Chebyshev chain.

All thresholds act on normalized terms, i.e. ``|xi_{n,j}|`` is compared with
``eps * sqrt(DS_n)``.  Lattice rows are evaluated in units of their common
step (see :mod:`clt_lab.schemes`), which makes every value here invariant
under rescaling the whole scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .distributions import Convention
from .schemes import DegenerateRowError, RowMeta, Scheme, row_meta

DEFAULT_EPS_GRID = (0.05, 0.1, 0.2, 0.5)
DEFAULT_C_GRID = (1.0, 4.0, 25.0, 100.0)


def _meta(s_or_meta, n=None) -> RowMeta:
    if isinstance(s_or_meta, RowMeta):
        return s_or_meta
    return row_meta(s_or_meta, n)


def _threshold(meta: RowMeta, eps: float) -> float:
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not meta.unit_variance > 0:
        raise DegenerateRowError("degenerate row")
    return eps * math.sqrt(meta.unit_variance)


def lindeberg_sum(s: Scheme | RowMeta, n: int | None = None, eps: float = 0.5,
                  strict: Convention = ">") -> float:
    """``(1/DS_n) * sum_j E[xi_{n,j}^2 ; |xi_{n,j}| > eps sqrt(DS_n)]``."""
    meta = _meta(s, n)
    t = _threshold(meta, eps)
    total = math.fsum(c * d.truncated_second_moment(t, strict) for d, c in meta.groups)
    return min(1.0, total / meta.unit_variance)


def _below(meta: RowMeta, eps: float) -> list[tuple[float, int]]:
    t = _threshold(meta, eps)
    return [(1.0 - d.tail_prob(t, ">="), c) for d, c in meta.groups]


def negligibility_individual(s: Scheme | RowMeta, n: int | None = None, eps: float = 0.5) -> float:
    """Worst case over the row of ``P(|xi_{n,j}| < eps sqrt(DS_n))``."""
    return min(p for p, _ in _below(_meta(s, n), eps))


def negligibility_individual_max(s: Scheme | RowMeta, n: int | None = None, eps: float = 0.5) -> float:
    """Best case over the row; reported alongside the worst case."""
    return max(p for p, _ in _below(_meta(s, n), eps))


def negligibility_joint(s: Scheme | RowMeta, n: int | None = None, eps: float = 0.5) -> float:
    """``P(max_j |xi_{n,j}| < eps sqrt(DS_n))``, the product over independent terms."""
    out = 1.0
    for p, c in _below(_meta(s, n), eps):
        out *= p ** c
    return out


def sum_tail_probs(s: Scheme | RowMeta, n: int | None = None, eps: float = 0.5) -> float:
    """``sum_j P(|xi_{n,j}| >= eps sqrt(DS_n))``."""
    meta = _meta(s, n)
    t = _threshold(meta, eps)
    return math.fsum(c * d.tail_prob(t, ">=") for d, c in meta.groups)


class ChebyshevChain(NamedTuple):
    """``lhs <= mid <= rhs`` must hold; ``rhs_strict`` uses ``>`` in the Lindeberg sum."""

    lhs: float
    mid: float
    rhs: float
    rhs_strict: float

    def holds(self, tol: float = 1e-12) -> bool:
        return self.lhs <= self.mid + tol and self.mid <= self.rhs + tol


def chebyshev_chain_check(s: Scheme | RowMeta, n: int | None = None, eps: float = 0.5) -> ChebyshevChain:
    """Union bound then Chebyshev:
    ``P(max_j |xi| >= t) <= sum_j P(|xi| >= t) <= L_n(eps)/eps^2`` with ``t = eps sqrt(DS_n)``.
    """
    meta = _meta(s, n)
    lhs = 1.0 - negligibility_joint(meta, eps=eps)
    mid = sum_tail_probs(meta, eps=eps)
    rhs = lindeberg_sum_unclipped(meta, eps, ">=") / eps ** 2
    rhs_strict = lindeberg_sum_unclipped(meta, eps, ">") / eps ** 2
    return ChebyshevChain(lhs, mid, rhs, rhs_strict)


def lindeberg_sum_unclipped(meta: RowMeta, eps: float, strict: Convention) -> float:
    t = _threshold(meta, eps)
    return math.fsum(c * d.truncated_second_moment(t, strict) for d, c in meta.groups) / meta.unit_variance


@dataclass
class RowDiagnostics:
    """Per-row record; ``ui_tail`` is filled in by one of the engines."""

    n: int
    k_n: int
    DS_n: float
    lindeberg: dict = field(default_factory=dict)
    neg_individual: dict = field(default_factory=dict)
    neg_individual_max: dict = field(default_factory=dict)
    neg_joint: dict = field(default_factory=dict)
    sum_tail_probs: dict = field(default_factory=dict)
    chebyshev: dict = field(default_factory=dict)
    ui_tail: dict = field(default_factory=dict)


def row_diagnostics(meta: RowMeta, eps_grid: Sequence[float] = DEFAULT_EPS_GRID) -> RowDiagnostics:
    out = RowDiagnostics(n=meta.n, k_n=meta.k_n, DS_n=meta.DS_n)
    for eps in eps_grid:
        out.lindeberg[eps] = lindeberg_sum(meta, eps=eps)
        out.neg_individual[eps] = negligibility_individual(meta, eps=eps)
        out.neg_individual_max[eps] = negligibility_individual_max(meta, eps=eps)
        out.neg_joint[eps] = negligibility_joint(meta, eps=eps)
        out.sum_tail_probs[eps] = sum_tail_probs(meta, eps=eps)
        out.chebyshev[eps] = chebyshev_chain_check(meta, eps=eps)
    return out
