"""Triangular-array schemes: rules ``n -> (xi_{n,1}, ..., xi_{n,k_n})``.

Lattice rows are re-expressed in units of their common step ``g``.  Every
normalized quantity downstream is computed from these unit members, so
multiplying all members of a scheme by a constant changes ``g`` only and
leaves the normalized numbers bit-for-bit identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .distributions import (
    ContinuousDist,
    Distribution,
    DistributionError,
    LatticeDist,
    centered_bernoulli,
    from_config,
    rademacher,
    to_fraction,
)

MAX_DENOMINATOR = 2 ** 63 - 1


class SchemeError(ValueError):
    """Unknown scheme name or invalid scheme parameters."""


class DegenerateRowError(SchemeError):
    """Row variance DS_n is zero."""


@dataclass(frozen=True)
class Scheme:
    """A triangular array.

    ``row_fn(n)`` returns the ``k_n`` independent members of row ``n``.  Rows
    may reuse the same (immutable) distribution object for identical members.
    """

    name: str
    params: Mapping
    row_fn: Callable[[int], Sequence[Distribution]] = field(repr=False)
    available_n: tuple[int, ...] | None = None

    def row(self, n: int) -> list[Distribution]:
        if n < 1:
            raise SchemeError(f"row index must be >= 1, got {n}")
        if self.available_n is not None and n not in self.available_n:
            raise SchemeError(f"scheme {self.name!r} has no row {n}")
        return list(self.row_fn(n))

    def k(self, n: int) -> int:
        return len(self.row(n))

    def lattice_compatible(self, n: int) -> bool:
        return row_meta(self, n).lattice_compatible

    def scaled(self, c) -> "Scheme":
        """Same scheme with every member multiplied by ``c > 0``."""
        c = to_fraction(c)
        if c <= 0:
            raise SchemeError("scale factor must be positive")
        base = self.row_fn

        def row_fn(n):
            cache: dict[int, Distribution] = {}
            out = []
            for d in base(n):
                key = id(d)
                if key not in cache:
                    cache[key] = d if (isinstance(d, LatticeDist) and d.is_degenerate) else d.scaled(c)
                out.append(cache[key])
            return out

        params = dict(self.params)
        params["scale"] = str(to_fraction(params.get("scale", 1)) * c)
        return Scheme(self.name, params, row_fn, self.available_n)


@dataclass(frozen=True)
class RowMeta:
    """Row ``n`` of a scheme: its members, ``DS_n`` and the common lattice.

    For lattice rows ``unit_members`` are the members divided by ``step``
    (exact rationals), ``unit_variance`` is ``DS_n / step**2`` and
    ``unit_offset`` is the exact offset of ``S_n / step``.  For other rows
    ``step`` is ``None`` and the unit members are the members themselves.
    """

    n: int
    k_n: int
    DS_n: float
    lattice_compatible: bool
    step: Fraction | None
    unit_offset: Fraction
    unit_variance: float
    members: tuple
    unit_members: tuple
    groups: tuple  # ((unit member, multiplicity), ...) in first-appearance order

    @property
    def unit_sd(self) -> float:
        return math.sqrt(self.unit_variance)


def _rational_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(math.gcd(a.numerator, b.numerator), math.lcm(a.denominator, b.denominator))


def common_step(members: Sequence[Distribution]) -> Fraction | None:
    """Largest step whose lattice contains every member's support spacing.

    Returns ``None`` if a member is continuous or the refinement needs a
    denominator beyond ``2**63 - 1``.  Single-atom members impose nothing.
    """
    g = None
    for d in members:
        if isinstance(d, ContinuousDist):
            return None
        if d.is_degenerate:
            continue
        g = d.step if g is None else _rational_gcd(g, d.step)
        if g.denominator > MAX_DENOMINATOR:
            return None
    return Fraction(1) if g is None else g


def _group(members) -> list[list]:
    groups: dict[int, list] = {}
    for d in members:
        entry = groups.setdefault(id(d), [d, 0])
        entry[1] += 1
    return list(groups.values())


def row_meta(s: Scheme, n: int) -> RowMeta:
    members = s.row(n)
    if not members:
        raise SchemeError(f"row {n} of {s.name!r} is empty")
    g = common_step(members)
    grouped = _group(members)

    if g is None:
        unit_groups = [(d, c) for d, c in grouped]
        unit_offset = Fraction(0)
    else:
        unit_cache = {}
        unit_groups = []
        unit_offset = Fraction(0)
        for d, c in grouped:
            u = LatticeDist(d.step / g, d.offset / g, d.indices, d.probs,
                            name=d.name, _degenerate_ok=True)
            unit_cache[id(d)] = u
            unit_groups.append((u, c))
            unit_offset += c * u.offset
        unit_members = tuple(unit_cache[id(d)] for d in members)

    unit_var = math.fsum(c * d.variance() for d, c in unit_groups)
    if not unit_var > 0:
        raise DegenerateRowError(f"degenerate row: row {n} of {s.name!r} has DS_n = 0")
    if g is None:
        unit_members = tuple(members)
        DS = unit_var
    else:
        DS = unit_var * float(g) ** 2
    return RowMeta(
        n=n,
        k_n=len(members),
        DS_n=DS,
        lattice_compatible=g is not None,
        step=g,
        unit_offset=unit_offset,
        unit_variance=unit_var,
        members=tuple(members),
        unit_members=unit_members,
        groups=tuple(unit_groups),
    )


# Built-in schemes.

def _iid(params) -> Scheme:
    base_cfg = params.get("base")
    base = rademacher() if base_cfg is None else from_config(base_cfg)
    if isinstance(base, LatticeDist) and base.is_degenerate:
        raise SchemeError("iid base distribution must be non-degenerate")
    return Scheme("iid", dict(params), lambda n: [base] * n)


def _poisson_bernoulli(params) -> Scheme:
    lam = to_fraction(params.get("lambda", 1))
    if lam <= 0:
        raise SchemeError("poisson-bernoulli needs lambda > 0")

    def row(n):
        if lam / n >= 1:
            raise SchemeError(f"poisson-bernoulli: lambda/n = {float(lam / n)} >= 1 at n = {n}")
        return [centered_bernoulli(lam / n)] * n

    return Scheme("poisson-bernoulli", dict(params, **{"lambda": float(lam)}), row)


def _variance_escape(params) -> Scheme:
    def row(n):
        delta = 1.0 / (n * n)
        d = LatticeDist.from_mapping(1, 0, {
            -n: delta / 2, -1: (1 - delta) / 2, 1: (1 - delta) / 2, n: delta / 2,
        }, name=f"variance-escape({n})")
        return [d] * n

    return Scheme("variance-escape", dict(params), row)


def _dominant_term(params) -> Scheme:
    def row(n):
        small = rademacher(Fraction(1, n))
        return [rademacher()] + [small] * (n - 1)

    return Scheme("dominant-term", dict(params), row)


def _custom(params) -> Scheme:
    rows_cfg = params.get("rows")
    if not isinstance(rows_cfg, Mapping) or not rows_cfg:
        raise SchemeError("custom scheme needs a non-empty 'rows' object")
    rows: dict[int, list] = {}
    for key, members in rows_cfg.items():
        try:
            n = int(key)
        except ValueError as exc:
            raise SchemeError(f"custom row key {key!r} is not an integer") from exc
        if n < 1:
            raise SchemeError(f"custom row key {key!r} must be >= 1")
        if not isinstance(members, Sequence) or isinstance(members, str) or not members:
            raise SchemeError(f"custom row {key!r} must be a non-empty list")
        try:
            rows[n] = [from_config(m) for m in members]
        except DistributionError as exc:
            raise SchemeError(f"custom row {key!r}: {exc}") from exc
    return Scheme("custom", {"rows": sorted(rows)}, lambda n: rows[n], tuple(sorted(rows)))


BUILTINS: dict[str, tuple[Callable[[Mapping], Scheme], str]] = {
    "iid": (_iid, "copies of a base law, k_n = n (default base: Rademacher)"),
    "poisson-bernoulli": (_poisson_bernoulli, "centered Bernoulli(lambda/n), k_n = n; Poisson limit"),
    "variance-escape": (_variance_escape, "+-1 w.p. 1-1/n^2, +-n w.p. 1/n^2, k_n = n; Gaussian limit, variance 1/2"),
    "dominant-term": (_dominant_term, "one Rademacher plus n-1 Rademacher/n terms; non-Gaussian limit"),
    "custom": (_custom, "rows listed explicitly in the config"),
}

PARAM_KEYS = {"iid": {"base"}, "poisson-bernoulli": {"lambda"}, "variance-escape": set(),
              "dominant-term": set(), "custom": {"rows"}}


def builtin_scheme(name: str, params: Mapping | None = None) -> Scheme:
    """Look up a registered scheme.  ``params["scale"]`` multiplies every member."""
    params = dict(params or {})
    if name not in BUILTINS:
        raise SchemeError(f"unknown scheme {name!r}; known: {', '.join(BUILTINS)}")
    unknown = sorted(set(params) - PARAM_KEYS[name] - {"scale"})
    if unknown:
        raise SchemeError(f"{name}: unknown parameter {unknown[0]!r}")
    scale = params.pop("scale", None)
    try:
        s = BUILTINS[name][0](params)
    except DistributionError as exc:
        raise SchemeError(str(exc)) from exc
    if scale is not None:
        try:
            s = s.scaled(scale)
        except DistributionError as exc:
            raise SchemeError(str(exc)) from exc
    return s


def scheme_from_config(cfg: Mapping) -> Scheme:
    if not isinstance(cfg, Mapping) or "name" not in cfg:
        raise SchemeError("scheme must be an object with a 'name'")
    params = {k: v for k, v in cfg.items() if k != "name"}
    return builtin_scheme(cfg["name"], params)
