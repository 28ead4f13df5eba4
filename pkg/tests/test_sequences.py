import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rainbow import sequences as sq
from rainbow.core import InstanceParams
from rainbow.errors import ParameterError
from rainbow.matcher import is_cross_dependent

from conftest import fam, tup


def seq(values, n=2, k=2):
    return sq.ThresholdSequence(tuple(values), InstanceParams(n, k, len(values)))


def test_sequence_invariants():
    with pytest.raises(ParameterError):
        seq((2, 1))
    with pytest.raises(ParameterError):
        seq((-1, 0))
    assert seq((Fraction(4, 2), 3)).values == (2, 3)
    assert seq((1.5, 2)).min_sizes() == (2, 3)


def test_dominates():
    assert sq.dominates(seq((1, 2, 3)), seq((1, 3, 3)))
    assert not sq.dominates(seq((1, 2, 3)), seq((2, 2, 2)))
    with pytest.raises(ParameterError):
        sq.dominates(seq((1, 2)), seq((1, 2, 3)))


def test_formula_examples():
    assert sq.seq_linear(InstanceParams(4, 2, 3)).values == (4, 8, 12)
    assert sq.seq_uniform_AH(InstanceParams(4, 2, 3)).values == (8, 8, 8)
    assert sq.seq_thm_main3(InstanceParams(1024, 2, 2)).values[0] == 2052
    t = sq.seq_truncated(InstanceParams(10, 2, 3), C=1)
    assert t.values[0] == 20
    assert math.sqrt(3 * math.log(3)) == pytest.approx(1.81544, abs=1e-5)


def test_main3_below_linear_in_large_regime():
    for s, k in [(2, 2), (3, 2), (2, 3)]:
        n = math.ceil(max(2**8 * s**1.5 * math.log2(s * k) ** 1.5, 8 * s * s))
        p = InstanceParams(n, k, s)
        assert sq.dominates(sq.seq_thm_main3(p), sq.seq_linear(p))


def test_format_and_parse():
    assert sq.format_value(Fraction(7, 2)) == "7/2"
    assert sq.format_value(4) == "4"
    assert sq.parse_value("7/2") == Fraction(7, 2)
    assert sq.parse_value("3") == 3


# ---------------------------------------------------------- constructions


def test_single_heavy_examples():
    S = sq.construct_claim1(InstanceParams(4, 2, 3))
    assert S.sizes == (2, 9, 9) and is_cross_dependent(S)
    p = InstanceParams(2, 2, 2)
    S = sq.construct_claim1(p)
    assert S.families[0] == fam(p, (1, 1))
    assert S.families[1] == fam(p, (1, 1), (1, 2), (2, 1))


@pytest.mark.parametrize("n,k,s", [(n, k, s) for n in range(2, 7) for k in range(2, 5) for s in range(2, 5) if s <= n])
def test_single_heavy_size_identity(n, k, s):
    S = sq.construct_claim1(InstanceParams(n, k, s))
    assert S.sizes[0] == (s - 1) * (n ** (k - 1) - (n - 1) ** (k - 1))
    assert all(x == (s - 1) * n ** (k - 1) + 1 for x in S.sizes[1:])


def test_single_heavy_other_b():
    S = sq.construct_claim1(InstanceParams(4, 2, 3), b=2)
    assert S.sizes == (2, 9, 9) and is_cross_dependent(S)


def test_pigeonhole_examples():
    p = InstanceParams(4, 2, 2)
    S = sq.construct_claim3(p)
    assert S.families[0] == fam(p, (1, 1)) and S.sizes == (1, 7)
    assert is_cross_dependent(S)
    assert sq.construct_claim3(InstanceParams(4, 3, 2)).sizes == (4, 28)
    with pytest.raises(ParameterError):
        sq.construct_claim3(InstanceParams(4, 2, 3))


def test_pigeonhole_pigeonhole_structure():
    p = InstanceParams(4, 2, 2)
    S = sq.construct_claim3(p)
    marked = {(0, 0), (1, 0)}  # (part 1, value 1) and (part 2, value 1)
    assert all(len(marked & set(b)) >= 2 for b in S.families[0])
    assert all(len(marked & set(b)) >= 1 for b in S.families[1])


@pytest.mark.parametrize("n,k,s", [(4, 2, 2), (4, 3, 2), (4, 2, 4), (3, 3, 2), (5, 2, 4)])
def test_pigeonhole_size_identity(n, k, s):
    S = sq.construct_claim3(InstanceParams(n, k, s))
    h = (s // 2) * ((s + 1) // 2) * n ** (k - 2)
    assert S.sizes == (h,) + (s * n ** (k - 1) - h,) * (s - 1)
    assert is_cross_dependent(S)


def test_counterexample_examples():
    p = InstanceParams(2, 2, 2)
    S = sq.construct_claim3(p)
    g = sq.seq_claim4(p)
    assert g.values == (0, 2)
    assert sq.is_counterexample_for(S, g)
    assert not sq.is_counterexample_for(S, seq((1, 2)))
    c1 = sq.construct_claim1(InstanceParams(4, 2, 3))
    assert not sq.is_counterexample_for(c1, sq.seq_uniform_AH(InstanceParams(4, 2, 3)))


# --------------------------------------------------------- witness search


def test_witness_examples():
    p = InstanceParams(2, 2, 2)
    assert sq.witness_search(p, seq((2, 2))).status == sq.SATISFYING
    rep = sq.witness_search(p, seq((0, 2)))
    assert rep.status == sq.WITNESS
    F1, F2 = rep.witness.families
    assert F1 == fam(p, (1, 1)) or len(F1) == 1
    assert len(F2) >= 3 and all(set(b) & set(next(iter(F1))) for b in F2)
    p3 = InstanceParams(2, 2, 3)
    rep = sq.witness_search(p3, seq((0, 0, 0)))
    assert rep.status == sq.WITNESS and rep.witness.sizes == (1, 1, 1)


def test_witness_report_is_verified():
    p = InstanceParams(2, 2, 2)
    for f in itertools.combinations_with_replacement(range(4), 2):
        rep = sq.witness_search(p, seq(f))
        if rep.status == sq.WITNESS:
            assert is_cross_dependent(rep.witness)
            assert sq.exceeds(rep.witness, seq(f))


def test_witness_budget_gives_inconclusive():
    p = InstanceParams(3, 2, 3)
    rep = sq.witness_search(p, sq.ThresholdSequence((4, 4, 4), p), budget=1)
    assert rep.status == sq.INCONCLUSIVE


def test_frontier_matches_brute_force():
    p = InstanceParams(2, 2, 2)
    for f in itertools.product(range(5), repeat=2):
        if f[0] > f[1]:
            continue
        t = seq(f)
        got = sq.witness_search(p, t).status == sq.SATISFYING
        assert got == sq.brute_force_satisfying(p, t), f


def test_frontier_without_symmetry():
    p = InstanceParams(2, 2, 2)
    for f in [(0, 2), (0, 3), (1, 1), (1, 2)]:
        a = sq.witness_search(p, seq(f), symmetry=False).status
        b = sq.witness_search(p, seq(f)).status
        assert a == b


def test_n3_exhaustive_statuses():
    # the uniform threshold is satisfying for k = 2
    p = InstanceParams(3, 2, 2)
    assert sq.witness_search(p, sq.seq_uniform_AH(p)).status == sq.SATISFYING
    assert sq.witness_search(p, sq.ThresholdSequence((0, 2), p)).status == sq.WITNESS


@settings(max_examples=30, deadline=None)
@given(st.tuples(st.integers(0, 4), st.integers(0, 4)), st.tuples(st.integers(0, 2), st.integers(0, 2)))
def test_monotonicity(f, bump):
    p = InstanceParams(2, 2, 2)
    f = tuple(sorted(f))
    g = tuple(sorted(a + b for a, b in zip(f, bump)))
    if not all(x <= y for x, y in zip(f, g)):
        return
    if sq.witness_search(p, seq(f)).status == sq.SATISFYING:
        assert sq.witness_search(p, seq(g)).status == sq.SATISFYING
