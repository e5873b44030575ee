import csv
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from clt_lab.distributions import LatticeDist, centered_bernoulli, lattice_uniform, rademacher
from clt_lab.exact import (
    LatticeIncompatible,
    NormalizedPmf,
    SupportCapExceeded,
    convolve_members,
    convolve_row,
    ks_distance,
    second_moment,
    ui_tail_exact,
    write_pmf_csv,
)
from clt_lab.gaussfit import STANDARD, GaussianParams, gaussian_cdf
from clt_lab.schemes import builtin_scheme, row_meta, scheme_from_config

PB = builtin_scheme("poisson-bernoulli", {"lambda": 1})


def _custom(members):
    return scheme_from_config({"name": "custom", "rows": {str(len(members)): members}})


def test_two_rademacher_unnormalized():
    lo, p, _ = convolve_members([rademacher(), rademacher()])
    pmf = {lo + i: q for i, q in enumerate(p) if q > 0}
    assert pmf == {-2: 0.25, 0: 0.5, 2: 0.25}


def test_single_member_identity():
    probs = {"-2": 0.4, "0": 0.2, "1": 0.2, "3": 0.2}
    s = _custom([{"lattice": {"step": "1", "offset": "0", "probs": probs}}])
    law = convolve_row(row_meta(s, 1))
    x, p = law.atoms()
    sd = math.sqrt(sum(int(k) ** 2 * v for k, v in probs.items()))
    np.testing.assert_allclose(x, np.array([-2, 0, 1, 3]) / sd, rtol=1e-15)
    np.testing.assert_array_equal(p, [0.4, 0.2, 0.2, 0.2])


def test_poisson_bernoulli_binomial_oracle():
    law = convolve_row(row_meta(PB, 100))
    k = np.arange(0, 101)
    ref = stats.binom.pmf(k, 100, 0.01)
    x_ref = (k - 1) / math.sqrt(0.99)
    got = law.cdf(x_ref + 1e-9) - law.cdf(x_ref - 1e-9)
    assert np.max(np.abs(got - ref)) < 1e-12
    # positions too
    x, p = law.atoms()
    np.testing.assert_allclose(x, x_ref[: x.size], rtol=0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from(["rad", "bern", "unif", "rad3", "half"]), min_size=1, max_size=7),
       st.randoms(use_true_random=False))
def test_enumeration_oracle_and_order_invariance(kinds, rnd):
    lib = {
        "rad": rademacher(), "bern": centered_bernoulli(Fraction(1, 4)),
        "unif": lattice_uniform(2), "rad3": rademacher(3), "half": rademacher(Fraction(1, 2)),
    }
    members = [lib[k] for k in kinds]
    # brute-force enumeration over the product space, keyed by exact rational values
    ref: dict[Fraction, float] = {}
    for combo in itertools.product(*[list(zip(d.indices, d.probs)) for d in members]):
        v = sum((d.step * int(i) + d.offset for d, (i, _) in zip(members, combo)), Fraction(0))
        ref[v] = ref.get(v, 0.0) + math.prod(q for _, q in combo)
    cfg = [{"lattice": {"step": str(d.step), "offset": str(d.offset),
                        "probs": {str(k): v for k, v in d.mapping().items()}}} for d in members]
    meta = row_meta(_custom(cfg), len(cfg))
    law = convolve_row(meta)
    sd = math.sqrt(meta.DS_n)
    x, p = law.atoms()
    keys = sorted(ref)
    assert x.size == len(keys)
    np.testing.assert_allclose(x, [float(k) / sd for k in keys], rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(p, [ref[k] for k in keys], rtol=0, atol=1e-14)
    shuffled = cfg[:]
    rnd.shuffle(shuffled)
    law2 = convolve_row(row_meta(_custom(shuffled), len(cfg)))
    assert law2.lo == law.lo and law2.probs.size == law.probs.size
    assert np.max(np.abs(law2.probs - law.probs)) < 1e-12


@pytest.mark.parametrize("name", ["iid", "poisson-bernoulli", "variance-escape", "dominant-term"])
def test_fft_matches_direct(name):
    s = builtin_scheme(name, {"lambda": 1} if name == "poisson-bernoulli" else None)
    meta = row_meta(s, 300)
    a = convolve_row(meta, method="direct")
    b = convolve_row(meta, method="fft")
    lo = min(a.lo, b.lo)
    hi = max(a.lo + a.probs.size, b.lo + b.probs.size)
    pa, pb = np.zeros(hi - lo), np.zeros(hi - lo)
    pa[a.lo - lo: a.lo - lo + a.probs.size] = a.probs
    pb[b.lo - lo: b.lo - lo + b.probs.size] = b.probs
    assert np.max(np.abs(pa - pb)) <= 1e-10


def test_grouped_and_ungrouped_agree():
    members = [rademacher()] * 5 + [centered_bernoulli(Fraction(1, 3))] * 4
    # centered Bernoulli(1/3) has offset -1/3; express everything in units of 1/3
    unit = [LatticeDist(d.step * 3, d.offset * 3, d.indices, d.probs) for d in members]
    lo1, p1, _ = convolve_members(unit, grouped=True)
    lo2, p2, _ = convolve_members(unit, grouped=False)
    assert lo1 == lo2 and np.max(np.abs(p1 - p2)) < 1e-15


def test_second_moment_examples():
    assert second_moment(convolve_row(row_meta(builtin_scheme("iid"), 1))) == 1.0
    degenerate = NormalizedPmf(scale=1.0, offset=0.0, lo=0, probs=np.array([1.0]))
    assert second_moment(degenerate) == 0.0


@pytest.mark.parametrize("name", ["iid", "poisson-bernoulli", "variance-escape", "dominant-term"])
@pytest.mark.parametrize("n", [2, 64, 2048])
def test_second_moment_identity(name, n):
    s = builtin_scheme(name, {"lambda": 1} if name == "poisson-bernoulli" else None)
    law = convolve_row(row_meta(s, n))
    assert abs(second_moment(law) - 1) <= 1e-9
    assert abs(law.total_mass() - 1) <= 1e-9
    assert abs(law.mean()) <= 1e-9


def test_ui_tail_examples():
    r1 = convolve_row(row_meta(builtin_scheme("iid"), 1))
    assert ui_tail_exact(r1, 2.0) == 0
    assert ui_tail_exact(r1, 0.5) == 1
    t = ui_tail_exact(convolve_row(row_meta(builtin_scheme("variance-escape"), 100)), 25.0)
    assert 0.40 <= t <= 0.55


def test_ui_tail_monotone_and_limit():
    law = convolve_row(row_meta(builtin_scheme("variance-escape"), 256))
    Cs = [1e-9, 0.1, 1, 4, 25, 100, 1e4]
    T = [ui_tail_exact(law, C) for C in Cs]
    assert all(a >= b for a, b in zip(T, T[1:]))
    assert T[0] == pytest.approx(second_moment(law), abs=1e-15)


def test_ks_examples():
    r1 = convolve_row(row_meta(builtin_scheme("iid"), 1))
    assert ks_distance(r1) == pytest.approx(0.5 - float(gaussian_cdf(-1.0)), abs=1e-12)
    assert ks_distance(r1) == pytest.approx(0.3413447, abs=5e-8)
    k = ks_distance(convolve_row(row_meta(builtin_scheme("iid"), 1024)))
    assert k <= 0.4748 / math.sqrt(1024)


def test_ks_uses_left_limits():
    # two atoms at +-1: sup over jumps includes F(x-) vs Phi(x)
    p = NormalizedPmf(scale=1.0, offset=0.0, lo=-1, probs=np.array([0.5, 0.0, 0.5]))
    dense = np.linspace(-5, 5, 200001)
    F = np.where(dense < -1, 0.0, np.where(dense < 1, 0.5, 1.0))
    brute = np.max(np.abs(F - gaussian_cdf(dense)))
    assert ks_distance(p) == pytest.approx(brute, abs=1e-6)
    assert ks_distance(p) >= brute


def test_ks_identity_on_matching_grid():
    # a pmf that places Phi's own increments on a fine grid tends to KS 0
    h = 1e-3
    k = np.arange(-8000, 8001)
    p = np.diff(gaussian_cdf((np.arange(-8000, 8002) - 0.5) * h))
    law = NormalizedPmf(scale=h, offset=0.0, lo=-8000, probs=p / p.sum())
    assert ks_distance(law) < h


def test_support_cap():
    meta = row_meta(builtin_scheme("iid"), 1000)
    with pytest.raises(SupportCapExceeded, match="mc"):
        convolve_row(meta, cap=100)


def test_lattice_incompatible():
    s = builtin_scheme("iid", {"base": {"continuous": {"family": "gaussian", "sigma2": 1.0}}})
    with pytest.raises(LatticeIncompatible):
        convolve_row(row_meta(s, 3))


def test_pmf_csv(tmp_path):
    law = convolve_row(row_meta(builtin_scheme("iid"), 3))
    path = tmp_path / "pmf.csv"
    write_pmf_csv(law, path)
    rows = list(csv.DictReader(path.open()))
    xs = [float(r["x"]) for r in rows]
    assert xs == sorted(xs) and len(rows) == 4
    assert [float(r["pmf"]) for r in rows] == [0.125, 0.375, 0.375, 0.125]
    assert float(rows[-1]["cdf"]) == 1.0


def test_quantile_and_cdf():
    law = convolve_row(row_meta(builtin_scheme("iid"), 2))
    assert law.cdf(0.0) == 0.75 and law.cdf(-1e-9) == 0.25
    assert law.quantile(0.25) == pytest.approx(-math.sqrt(2))
    assert law.quantile(0.5) == 0.0
    g = GaussianParams(0.0, 0.5)
    assert law.ks(g) == ks_distance(law, g)
    assert law.ks() == ks_distance(law, STANDARD)
