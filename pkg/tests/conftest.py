import pytest

from rainbow.core import Family, GroundElement, InstanceParams, make_block, partite_block


def tup(*values):
    """Partite tuple from 1-based values."""
    return partite_block([v - 1 for v in values])


def elems(*pairs):
    """General block from 1-based (part, value) pairs."""
    return make_block([(p - 1, v - 1) for p, v in pairs])


def fam(params, *tuples):
    return Family(params, [tup(*t) for t in tuples])


@pytest.fixture
def p22():
    return InstanceParams(2, 2, 2)


__all__ = ["tup", "elems", "fam", "GroundElement"]
