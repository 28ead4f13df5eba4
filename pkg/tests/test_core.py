import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rainbow.core import (
    Family,
    FamilySystem,
    Hyperplane,
    InstanceParams,
    PerfectMatching,
    box_family,
    decode_code,
    deserialize,
    encode_values,
    full_cube,
    hyperplane_family,
    make_block,
    random_family,
    restrict_exact,
    restrict_link,
    restrict_star,
    serialize,
    system_from_doc,
)
from rainbow.errors import ParameterError, ParseError, ValidationError
from rainbow.sequences import construct_claim1

from conftest import elems, fam, tup

P22 = InstanceParams(2, 2)
SMALL = fam(P22, (1, 1), (1, 2), (2, 1))


def test_params_validation():
    with pytest.raises(ParameterError):
        InstanceParams(0, 2)
    with pytest.raises(ParameterError):
        InstanceParams(2, 2, 0)
    assert InstanceParams(3, 4).cube_size == 81


def test_block_rejects_repeated_part():
    with pytest.raises(ParameterError):
        make_block([(0, 0), (0, 1)])
    with pytest.raises(ParameterError):
        make_block([(0, 5)], P22)


def test_restrict_link_examples():
    assert restrict_link(SMALL, elems((1, 1))) == Family(P22, [elems((2, 1)), elems((2, 2))])
    assert restrict_link(SMALL, ()) == SMALL
    cube = full_cube(InstanceParams(4, 3))
    link = restrict_link(cube, elems((1, 1), (2, 2)))
    assert link == Family(cube.params, [elems((3, c)) for c in range(1, 5)])


def test_restrict_star_examples():
    assert restrict_star(SMALL, elems((1, 1))) == fam(P22, (1, 1), (1, 2))
    assert restrict_star(SMALL, ()) == SMALL
    p = InstanceParams(4, 3)
    H = hyperplane_family(p, Hyperplane(0, 0))
    assert restrict_star(H, elems((2, 3))) == fam(p, *[(1, 3, c) for c in range(1, 5)])


def test_restrict_exact_examples():
    got = restrict_exact(SMALL, elems((1, 1)), elems((1, 1), (2, 1)))
    assert got == Family(P22, [elems((2, 2))])
    assert restrict_exact(SMALL, (), ()) == SMALL
    p = InstanceParams(3, 2)
    got = restrict_exact(full_cube(p), (), elems((1, 1)))
    assert len(got) == 6 and all(b[0].value != 0 for b in got)
    with pytest.raises(ParameterError):
        restrict_exact(SMALL, elems((1, 1)), elems((2, 1)))


def test_restrict_rejects_out_of_range():
    with pytest.raises(ParameterError):
        restrict_link(SMALL, elems((3, 1)))


def test_hyperplane_examples():
    p = InstanceParams(4, 2)
    assert hyperplane_family(p, Hyperplane(0, 0)) == fam(p, (1, 1), (1, 2), (1, 3), (1, 4))
    assert len(hyperplane_family(InstanceParams(3, 3), Hyperplane(1, 1))) == 9
    p = InstanceParams(4, 3)
    both = hyperplane_family(p, Hyperplane(0, 0)).intersection(hyperplane_family(p, Hyperplane(1, 0)))
    assert len(both) == 4
    with pytest.raises(ParameterError):
        hyperplane_family(p, Hyperplane(3, 0))


def test_counts_index():
    p = InstanceParams(3, 3)
    F = box_family(p, [[0, 1], [0], [0, 1, 2]])
    assert F.counts.shape == (3, 3)
    assert F.hyperplane_count(Hyperplane(0, 0)) == 3
    assert F.hyperplane_count(Hyperplane(1, 0)) == 6
    assert F.hyperplane_count(Hyperplane(1, 1)) == 0


def test_codes_roundtrip():
    rng = np.random.default_rng(1)
    vals = rng.integers(0, 5, size=(20, 3))
    codes = encode_values(vals, 5)
    for v, c in zip(vals, codes):
        assert decode_code(int(c), 5, 3) == tuple(v)


def test_family_system_validation():
    p = InstanceParams(2, 2, 2)
    with pytest.raises(ValidationError):
        FamilySystem(p, [SMALL])
    with pytest.raises(ValidationError):
        FamilySystem(p, [SMALL, Family(InstanceParams(3, 2), [])])


def test_perfect_matching_canonical():
    p = InstanceParams(3, 2)
    a = PerfectMatching.from_rows(p, [(2, 0), (0, 1), (1, 2)])
    b = PerfectMatching.from_rows(p, [(0, 1), (1, 2), (2, 0)])
    assert a == b
    assert a.rows == ((0, 1), (1, 2), (2, 0))
    with pytest.raises(ParameterError):
        PerfectMatching.from_rows(p, [(0, 0), (1, 0), (2, 1)])


# ------------------------------------------------------------ documents


def test_single_heavy_roundtrip():
    system = construct_claim1(InstanceParams(4, 2, 3))
    text = serialize(system)
    back = deserialize(text)
    assert back.sizes == (2, 9, 9)
    assert serialize(back) == text


def test_document_field_names():
    doc = json.loads(serialize(construct_claim1(InstanceParams(4, 2, 2))))
    assert list(doc) == ["n", "k", "s", "label", "families"]


def test_abbreviated_and_pair_forms_agree():
    a = system_from_doc({"n": 2, "k": 2, "s": 1, "label": "", "families": [[[1, 2]]]})
    b = system_from_doc({"n": 2, "k": 2, "s": 1, "label": "", "families": [[[[1, 1], [2, 2]]]]})
    assert a.families == b.families


def test_general_blocks_roundtrip():
    p = InstanceParams(3, 3, 1)
    system = FamilySystem(p, [Family(p, [elems((1, 2)), elems((2, 1), (3, 3)), ()])])
    assert deserialize(serialize(system)).families == system.families


def test_rejects_repeated_part():
    doc = {"n": 2, "k": 2, "s": 1, "label": "", "families": [[[[1, 1], [1, 2]]]]}
    with pytest.raises(ValidationError, match=r"families\[0\]\[0\]"):
        system_from_doc(doc)


def test_rejects_wrong_family_count():
    with pytest.raises(ValidationError):
        system_from_doc({"n": 2, "k": 2, "s": 2, "label": "", "families": [[]]})


def test_parse_error_has_position():
    with pytest.raises(ParseError, match="line"):
        deserialize('{"n": 2,\n "k": }')


# ----------------------------------------------------------- properties

params_st = st.tuples(st.integers(1, 4), st.integers(1, 3))


@st.composite
def family_and_block(draw):
    n, k = draw(params_st)
    p = InstanceParams(n, k)
    size = draw(st.integers(0, p.cube_size))
    F = random_family(p, size, np.random.default_rng(draw(st.integers(0, 2**32 - 1))))
    parts = draw(st.lists(st.integers(0, k - 1), unique=True, max_size=k))
    X = make_block([(j, draw(st.integers(0, n - 1))) for j in parts])
    return F, X


@settings(max_examples=150, deadline=None)
@given(family_and_block())
def test_link_and_star_have_equal_size(data):
    F, X = data
    assert len(restrict_link(F, X)) == len(restrict_star(F, X))


@settings(max_examples=150, deadline=None)
@given(family_and_block())
def test_exact_is_contained_in_link(data):
    F, X = data
    assert restrict_exact(F, X, X).blocks <= restrict_link(F, X).blocks


@settings(max_examples=100, deadline=None)
@given(family_and_block())
def test_hyperplane_counts_sum_to_size(data):
    F, _ = data
    assert all(F.counts[i].sum() == len(F) for i in range(F.params.k))


@settings(max_examples=100, deadline=None)
@given(st.lists(family_and_block(), min_size=1, max_size=3))
def test_serialization_roundtrip(items):
    p = items[0][0].params
    fams = [F for F, _ in items if F.params == p]
    system = FamilySystem(p.with_s(len(fams)), fams, "prop")
    text = serialize(system)
    back = deserialize(text)
    assert back.families == system.families and serialize(back) == text
