import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rainbow import randmatch as rm
from rainbow.battery import anticoncentration_family
from rainbow.core import Family, Hyperplane, InstanceParams, box_family, full_cube, hyperplane_family, random_family
from rainbow.errors import ParameterError

from conftest import fam


def union_h12_plus(n):
    """H_1(1) ∪ H_1(2) ∪ {(3,1)} at k = 2."""
    p = InstanceParams(n, 2)
    H = hyperplane_family(p, Hyperplane(0, 0)).union(hyperplane_family(p, Hyperplane(0, 1)))
    return H.union(fam(p, (3, 1)))


# --------------------------------------------------------------- sampling


def test_sample_is_partition():
    rng = rm.make_rng(0)
    for n, k in [(1, 3), (3, 2), (5, 4)]:
        p = InstanceParams(n, k)
        for _ in range(20):
            M = rm.sample_matching(p, rng)
            assert [r[0] for r in M.rows] == list(range(n))
            for j in range(k):
                assert sorted(r[j] for r in M.rows) == list(range(n))


def test_single_matching_when_n_is_1():
    M = rm.sample_matching(InstanceParams(1, 4), rm.make_rng(3))
    assert M.rows == ((0, 0, 0, 0),)
    assert rm.matching_count(InstanceParams(1, 4)) == 1


def test_uniformity_chi_square():
    p = InstanceParams(3, 2)
    rng = rm.make_rng(7)
    counts = Counter(rm.sample_matching(p, rng).rows for _ in range(60_000))
    assert len(counts) == 6
    expected = 10_000
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    # 5 degrees of freedom, upper 1% point
    assert chi2 < 15.086


def test_all_matchings_enumeration():
    p = InstanceParams(3, 3)
    ms = list(rm.all_matchings(p))
    assert len(ms) == rm.matching_count(p) == 36
    assert len(set(ms)) == 36


# --------------------------------------------------------------------- xi


def test_xi_examples():
    p = InstanceParams(3, 2)
    H = hyperplane_family(p, Hyperplane(0, 0))
    assert all(rm.xi(H, M) == 1 for M in rm.all_matchings(p))
    assert all(rm.xi(Family(p, []), M) == 0 for M in rm.all_matchings(p))
    p4 = InstanceParams(4, 2)
    B = box_family(p4, [range(2), range(4)])
    assert {rm.xi(B, M) for M in rm.all_matchings(p4)} == {2}


def test_estimate_xi_exact_examples():
    F = union_h12_plus(4)
    st_ = rm.estimate_xi(F, 3)
    assert st_.exact
    assert st_.p_neq == Fraction(1, 4) and st_.p_gt == Fraction(1, 4)
    B = box_family(InstanceParams(4, 2), [range(2), range(4)])
    assert rm.estimate_xi(B, 3).p_neq == 0
    assert rm.estimate_xi(Family(InstanceParams(4, 2), []), 1).p_neq == 0


def test_exact_mean_identity():
    rng = np.random.default_rng(5)
    for n, k in [(3, 2), (4, 2), (3, 3)]:
        p = InstanceParams(n, k)
        F = random_family(p, int(rng.integers(0, p.cube_size + 1)), rng)
        assert rm.estimate_xi(F, 1).mean == Fraction(len(F), n ** (k - 1))


def test_exact_and_sampled_agree():
    rng = np.random.default_rng(11)
    p = InstanceParams(4, 3)
    trials = 20_000
    for _ in range(5):
        F = random_family(p, int(rng.integers(1, p.cube_size)), rng)
        for s in (1, 2, 3):
            ex = rm.estimate_xi(F, s, exact=True)
            mc = rm.estimate_xi(F, s, trials=trials, seed=3, exact=False)
            for a, b in [(ex.p_neq, mc.p_neq), (ex.p_gt, mc.p_gt)]:
                q = float(a)
                se = math.sqrt(max(q * (1 - q), 1e-12) / trials)
                assert abs(q - b) <= 4 * se + 1e-12


def test_sampled_is_reproducible():
    F = union_h12_plus(10)
    a = rm.estimate_xi(F, 3, trials=500, seed=9, exact=False)
    b = rm.estimate_xi(F, 3, trials=500, seed=9, exact=False)
    assert a == b


# ---------------------------------------------------------- concentration


def test_conc_bound_examples():
    assert rm.conc_bound(0.1, 30, 2) == pytest.approx(2 * math.exp(-4 / 5.5))
    assert rm.conc_bound(0.1, 30, 2) == pytest.approx(0.9664, abs=1e-4)
    assert rm.conc_bound(0.1, 30, 2, 1) == rm.conc_bound(0.1, 30, 2, -1)
    big = [rm.conc_bound(0.1, 30, lam) for lam in (10, 100, 1000)]
    assert big[0] > big[1] > big[2]
    # the exponent approaches lambda / 2
    assert -math.log(rm.conc_bound(0.1, 30, 500) / 2) / 500 == pytest.approx(0.5, rel=2e-3)
    with pytest.raises(ParameterError):
        rm.conc_bound(0.1, 30, 0)


def test_concentration_random_family():
    p = InstanceParams(30, 3)
    F = random_family(p, round(0.1 * p.cube_size), np.random.default_rng(0))
    rep = rm.check_concentration(F, 10_000, (1, 2, 4, 8), seed=0)
    assert rep.flags == 0


def test_concentration_degenerate_families():
    p = InstanceParams(6, 3)
    rep = rm.check_concentration(hyperplane_family(p, Hyperplane(0, 0)), 2000)
    assert all(r.count == 0 for r in rep.rows)
    rep = rm.check_concentration(Family(p, []), 2000)
    assert all(r.count == 0 for r in rep.rows)


def test_tail_ratio_examples():
    rep = rm.tail_ratio_check(union_h12_plus(4), 3)
    assert rep.p_gt == Fraction(1, 4) and rep.holds
    B = box_family(InstanceParams(4, 2), [range(2), range(4)])
    rep = rm.tail_ratio_check(B, 3)
    assert rep.p_gt == 0 and rep.p_neq == 0 and rep.holds
    with pytest.raises(ParameterError):
        rm.tail_ratio_check(fam(InstanceParams(4, 2), (1, 1)), 3)


def test_tail_ratio_grid():
    p = InstanceParams(4, 2)
    rng = np.random.default_rng(2)
    for _ in range(200):
        F = random_family(p, int(rng.integers(4, 17)), rng)
        assert rm.tail_ratio_check(F, 2).holds


# --------------------------------------------------------------- P_{a,b}


def test_pab_examples():
    p = InstanceParams(4, 3)
    H = hyperplane_family(p, Hyperplane(0, 0))
    assert len(rm.pab_family(H, 0, 1)) == 16
    assert len(rm.pab_family(H, 1, 0)) == 0
    with pytest.raises(ParameterError):
        rm.pab_family(H, 1, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), st.integers(2, 3), st.integers(0, 2**32 - 1), st.data())
def test_pab_count_identity(n, k, seed, data):
    p = InstanceParams(n, k)
    rng = np.random.default_rng(seed)
    F = random_family(p, int(rng.integers(0, p.cube_size + 1)), rng)
    a, b = data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
    j = data.draw(st.integers(0, k - 1))
    Pab, Pba = rm.pab_family(F, a, b, j), rm.pab_family(F, b, a, j)
    assert not Pab.blocks & Pba.blocks
    assert F.counts[j, a] - F.counts[j, b] == len(Pab) - len(Pba)


# ------------------------------------------------------------ classifier


def test_classify_anticoncentration_example():
    F, pF = anticoncentration_family()
    assert pF == Fraction(1, 1000)
    c = rm.classify_hyperplanes(F, pF, 3)
    assert c.coordinates[0].case == rm.FAT_THIN and c.coordinates[0].fat == (0, 1)
    assert [x.case for x in c.coordinates[1:]] == [rm.BOUNDED] * 3
    assert c.fat_count == 2 and c.parallel
    assert c.hypothesis_part1 and c.hypothesis_part23


def test_classify_full_cube_and_empty():
    p = InstanceParams(4, 3)
    c = rm.classify_hyperplanes(full_cube(p), 0, 5)
    assert all(x.case == rm.FAT_THIN and x.fat == (0, 1, 2, 3) for x in c.coordinates)
    assert not c.parallel
    c = rm.classify_hyperplanes(Family(p, []), 0, 3)
    assert all(x.case == rm.BOUNDED and max(x.counts) == 0 for x in c.coordinates)


def test_classify_reports_violation():
    # half a hyperplane is neither fat, thin nor bounded at p = 0
    p = InstanceParams(8, 2)
    F = box_family(p, [range(1), range(4)])
    c = rm.classify_hyperplanes(F, 0, 2)
    assert c.violations == (0,)


def test_classify_hypothesis_regime():
    """Parallel fat hyperplanes, count s-1, when |F| = (s-1) n^(k-1) + 1 and p_F is small."""
    for n, k, s in [(8, 3, 3), (9, 3, 3), (8, 4, 4)]:
        p = InstanceParams(n, k)
        F = Family(p, [], check=False)
        for a in range(s - 1):
            F = F.union(hyperplane_family(p, Hyperplane(0, a)))
        F = F.union(Family(p, [tuple((j, 0 if j else s - 1) for j in range(k))], check=False))
        pF = Fraction(1, n ** (k - 1))
        assert pF <= Fraction(1, 4 * n * (s - 1))
        c = rm.classify_hyperplanes(F, pF, s)
        assert c.fat_count == s - 1 and c.parallel


# ----------------------------------------------------------------- mixing


def test_mixing_examples():
    sub = InstanceParams(3, 2)
    P = fam(sub, (1, 1))
    assert rm.disjoint_pair_count(P) == 4
    assert rm.mixing_bound(3, 3, 1) == Fraction(8, 3)
    assert rm.disjoint_pair_count(Family(sub, [])) == 0
    assert rm.disjoint_pair_count(full_cube(sub)) == 0
    assert rm.mixing_bound(3, 3, 0) == rm.mixing_bound(3, 3, 9) == 0
    with pytest.raises(ParameterError):
        rm.mixing_bound(3, 2, 1)


def _disjoint_pairs_brute(P):
    cube = full_cube(P.params)
    return sum(
        1 for x in P for y in cube if y not in P and all(a.value != b.value for a, b in zip(x, y))
    )


def test_mixing_exhaustive_small():
    for n in (2, 3):
        sub = InstanceParams(n, 2)
        cube = full_cube(sub).sorted_blocks
        for bits in range(1 << len(cube)):
            P = Family(sub, [b for i, b in enumerate(cube) if bits >> i & 1], check=False)
            count = rm.disjoint_pair_count(P)
            assert count >= rm.mixing_bound(n, 3, len(P))
            if bits % 37 == 0:
                assert count == _disjoint_pairs_brute(P)


def test_mixing_n4_exhaustive_by_size_sample():
    sub = InstanceParams(4, 2)
    cube = full_cube(sub).sorted_blocks
    # every subset of size <= 2 and >= 14, plus random middles
    for m in (0, 1, 2, 14, 15, 16):
        for combo in itertools.combinations(cube, m):
            P = Family(sub, combo, check=False)
            assert rm.disjoint_pair_count(P) >= rm.mixing_bound(4, 3, m)


# ------------------------------------------------------------ spread lemma


def test_spread_lemma_full_cube():
    F = full_cube(InstanceParams(8, 2))
    rep = rm.spread_lemma_check(F, 8, 3, Fraction(1, 3), trials=10_000, seed=0)
    assert rep.status in (rm.PASS, rm.VACUOUS)
    assert rep.empirical >= rep.bound - 3 * rep.sigma


def test_spread_lemma_vacuous_and_trivial():
    F = full_cube(InstanceParams(4, 2))
    assert rm.spread_lemma_check(F, 4, 1, 0.8, trials=500).status == rm.VACUOUS
    rep = rm.spread_lemma_check(F, 4, 1, 1.0, trials=500)
    assert rep.empirical == 1.0


def test_spread_lemma_requires_spread():
    F = fam(InstanceParams(4, 2), (1, 1))
    with pytest.raises(ParameterError):
        rm.spread_lemma_check(F, 4, 1, 1.0)
    with pytest.raises(ParameterError):
        rm.spread_lemma_check(full_cube(InstanceParams(4, 2)), 2, 1, 1.0)
