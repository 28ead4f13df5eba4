"""Rainbow matchings in the complete k-partite hypergraph [n]^k.

Submodules: ``core`` (ground set, families, documents), ``matcher``
(exact and greedy rainbow matching), ``sequences`` (threshold sequences,
constructions, witness search), ``randmatch`` (random perfect matchings),
``spread`` (spread approximations) and ``nullstellensatz`` (F_p(alpha)
arithmetic and coefficient certificates).
"""

from .core import (
    Family,
    FamilySystem,
    GroundElement,
    Hyperplane,
    InstanceParams,
    PerfectMatching,
    deserialize,
    serialize,
)
from .errors import (
    InvariantViolation,
    ParameterError,
    ParseError,
    PreconditionError,
    RainbowError,
    ValidationError,
)
from .matcher import find_rainbow, greedy_large_n, is_cross_dependent

__version__ = "0.1.0"
