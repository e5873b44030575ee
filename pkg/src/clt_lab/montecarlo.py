"""Seeded Monte Carlo estimates of the law of ``S_n / sqrt(DS_n)``.

Random streams: replicates are split into fixed blocks of ``BLOCK``
consecutive replicates; block ``b`` draws from
``Generator(Philox(SeedSequence(seed, spawn_key=(*stream_key, b))))``.  Within a block,
members are drawn group by group in row order.  The partition does not depend
on the number of worker threads, so batches are bit-identical for any degree
of parallelism.

Lattice rows are sampled as integer lattice sums and mapped to values with the
same formula the exact engine uses, so empirical and exact atoms coincide.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exact import NormalizedPmf
from .gaussfit import STANDARD, GaussianParams, gaussian_cdf
from .schemes import RowMeta, Scheme, row_meta

BLOCK = 1024
COLUMN_CHUNK = 4096
DEFAULT_REPS = 100_000
DEFAULT_ALPHA = 1e-3
RNG_ALGORITHM = f"numpy-Philox4x64/SeedSequence(seed,spawn_key=(*stream_key,block))/block={BLOCK}"


def dkw_band(reps: int, alpha: float = DEFAULT_ALPHA) -> float:
    """Dvoretzky-Kiefer-Wolfowitz radius ``sqrt(ln(2/alpha) / (2 reps))``."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * reps))


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("CLT_LAB_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


@dataclass(frozen=True, eq=False)
class SampleBatch:
    n: int
    reps: int
    seed: int
    values: np.ndarray
    indices: np.ndarray | None = None  # sorted lattice sums, lattice rows only

    def quantile(self, q: float) -> float:
        i = min(self.reps - 1, max(0, math.ceil(q * self.reps) - 1))
        return float(self.values[i])

    def ks(self, g: GaussianParams = STANDARD) -> float:
        return empirical_ks(self, g)[0]

    def ui_tail(self, C: float) -> float:
        return empirical_ui_tail(self, C)

    def second_moment(self) -> float:
        return math.fsum(self.values ** 2) / self.reps

    def fourth_moment(self) -> float:
        return math.fsum(self.values ** 4) / self.reps

    def mean(self) -> float:
        return math.fsum(self.values) / self.reps


def _block_stream(seed: int, key: tuple, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(*key, block))
    return np.random.Generator(np.random.Philox(ss))


def _draw_block(meta: RowMeta, seed: int, key: tuple, block: int, m: int):
    rng = _block_stream(seed, key, block)
    if meta.lattice_compatible:
        total = np.zeros(m, dtype=np.int64)
        for u, count in meta.groups:
            k = u.indices * int(u.step)
            done = 0
            while done < count:
                c = min(COLUMN_CHUNK, count - done)
                total += k[u.sample_positions(rng, (m, c))].sum(axis=1)
                done += c
        return total
    total = np.zeros(m)
    for d, count in meta.groups:
        done = 0
        while done < count:
            c = min(COLUMN_CHUNK, count - done)
            total += d.sample(rng, (m, c)).sum(axis=1)
            done += c
    return total


def sample_sums(s: Scheme | RowMeta, n: int | None = None, reps: int = DEFAULT_REPS,
                seed: int = 0, threads: int | None = None, stream_key: tuple = ()) -> SampleBatch:
    """``reps`` independent draws of ``S_n / sqrt(DS_n)``, sorted ascending.

    ``stream_key`` separates independent experiments sharing one seed (the
    report runner passes ``(n,)``).
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    meta = s if isinstance(s, RowMeta) else row_meta(s, n)
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    key = tuple(int(k) for k in stream_key)
    sizes = [min(BLOCK, reps - b * BLOCK) for b in range(math.ceil(reps / BLOCK))]
    jobs = list(enumerate(sizes))
    nthreads = worker_count(threads)
    if nthreads == 1 or len(jobs) == 1:
        parts = [_draw_block(meta, seed, key, b, m) for b, m in jobs]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(pool.map(lambda job: _draw_block(meta, seed, key, *job), jobs))
    raw = np.concatenate(parts)
    if meta.lattice_compatible:
        idx = np.sort(raw)
        scale = 1.0 / meta.unit_sd
        values = idx * scale + float(meta.unit_offset) * scale
        idx.setflags(write=False)
    else:
        idx = None
        values = np.sort(raw / meta.unit_sd)
    values.setflags(write=False)
    return SampleBatch(meta.n, reps, seed, values, idx)


def empirical_ui_tail(b: SampleBatch, C: float) -> float:
    """``(1/reps) * sum x^2 1{x^2 > C}``."""
    if not C > 0:
        raise ValueError("C must be positive")
    x2 = b.values ** 2
    return math.fsum(x2[x2 > C]) / b.reps


def empirical_ks(b: SampleBatch, g: GaussianParams = STANDARD,
                 alpha: float = DEFAULT_ALPHA) -> tuple[float, float]:
    """One-sample KS statistic against ``Phi_{a, sigma^2}`` and the DKW band."""
    N = b.reps
    phi = gaussian_cdf(b.values, g)
    i = np.arange(1, N + 1)
    d_plus = np.max(i / N - phi)
    d_minus = np.max(phi - (i - 1) / N)
    return float(max(d_plus, d_minus, 0.0)), dkw_band(N, alpha)


def ks_against_pmf(b: SampleBatch, p: NormalizedPmf) -> float:
    """Sup-distance between the empirical CDF of a lattice batch and an exact lattice law."""
    if b.indices is None:
        raise ValueError("batch carries no lattice indices")
    nz = np.flatnonzero(p.probs)
    pmf_idx = p.lo + nz
    F = np.cumsum(p.probs[nz])
    points = np.union1d(pmf_idx, b.indices)
    G = np.searchsorted(b.indices, points, side="right") / b.reps
    pos = np.searchsorted(pmf_idx, points, side="right")
    Fp = np.where(pos > 0, F[np.maximum(pos - 1, 0)], 0.0)
    return float(np.max(np.abs(G - Fp)))


def write_samples_csv(b: SampleBatch, path: str | Path) -> None:
    with open(path, "w") as fh:
        fh.writelines(f"{v!r}\n" for v in b.values.tolist())
