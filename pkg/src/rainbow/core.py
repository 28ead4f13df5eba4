"""Ground set, blocks, families and family systems over [k] x [n].

Indices are 0-based everywhere in the Python API; the document
serializer (and therefore the CLI) speaks the 1-based convention.
A block is a sorted tuple of ``GroundElement`` values with at most one
element per part; a partite tuple is the special case of one element in
every part.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import ParameterError, ParseError, ValidationError


@dataclass(frozen=True)
class InstanceParams:
    n: int
    k: int
    s: int = 1

    def __post_init__(self):
        for name in ("n", "k", "s"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ParameterError(f"{name} must be a positive integer, got {value!r}")

    @property
    def cube_size(self) -> int:
        return self.n**self.k

    def with_s(self, s: int) -> "InstanceParams":
        return InstanceParams(self.n, self.k, s)


class GroundElement(NamedTuple):
    part: int
    value: int


class Hyperplane(NamedTuple):
    """All tuples whose ``coord``-th entry equals ``value``."""

    coord: int
    value: int


Block = tuple  # tuple[GroundElement, ...], sorted by (part, value)


def make_block(elements: Iterable[Sequence[int]], params: InstanceParams | None = None) -> Block:
    """Normalize ``elements`` into a canonical block.

    Raises ParameterError if two elements share a part or an index is
    outside ``params``.
    """
    block = tuple(sorted(GroundElement(int(p), int(v)) for p, v in elements))
    parts = [e.part for e in block]
    if len(set(parts)) != len(parts):
        raise ParameterError(f"block {block} has two elements in the same part")
    if params is not None:
        for e in block:
            if not (0 <= e.part < params.k and 0 <= e.value < params.n):
                raise ParameterError(f"element {tuple(e)} outside [k]x[n] for {params}")
    return block


def partite_block(values: Sequence[int]) -> Block:
    """The block of a tuple ``(x_1, ..., x_k)`` (0-based values)."""
    return tuple(GroundElement(j, int(v)) for j, v in enumerate(values))


def block_values(block: Block) -> tuple[int, ...]:
    """Inverse of :func:`partite_block`; only meaningful for complete blocks."""
    return tuple(e.value for e in block)


def is_complete(block: Block, k: int) -> bool:
    return len(block) == k


def block_mask(block: Block, n: int) -> int:
    mask = 0
    for part, value in block:
        mask |= 1 << (part * n + value)
    return mask


def blocks_disjoint(a: Block, b: Block) -> bool:
    return not set(a) & set(b)


def in_hyperplane(block: Block, h: Hyperplane) -> bool:
    return GroundElement(h.coord, h.value) in block


class Family:
    """An immutable set of blocks over a common (n, k).

    ``counts[j, a]`` is the number of blocks containing element (j, a),
    which for partite families equals ``|F ∩ H_j(a)|``.
    """

    def __init__(self, params: InstanceParams, blocks: Iterable[Block] = (), *, check: bool = True):
        self.params = params
        if check:
            blocks = [make_block(b, params) for b in blocks]
        self.blocks: frozenset = frozenset(blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[Block]:
        return iter(self.sorted_blocks)

    def __contains__(self, block) -> bool:
        return block in self.blocks

    def __eq__(self, other) -> bool:
        if not isinstance(other, Family):
            return NotImplemented
        return (
            (self.params.n, self.params.k) == (other.params.n, other.params.k)
            and self.blocks == other.blocks
        )

    def __hash__(self) -> int:
        return hash((self.params.n, self.params.k, self.blocks))

    def __repr__(self) -> str:
        return f"Family(n={self.params.n}, k={self.params.k}, size={len(self)})"

    @cached_property
    def sorted_blocks(self) -> tuple:
        return tuple(sorted(self.blocks))

    @cached_property
    def partite(self) -> bool:
        k = self.params.k
        return all(len(b) == k for b in self.blocks)

    @cached_property
    def counts(self) -> np.ndarray:
        out = np.zeros((self.params.k, self.params.n), dtype=np.int64)
        for b in self.blocks:
            for part, value in b:
                out[part, value] += 1
        out.setflags(write=False)
        return out

    @cached_property
    def masks(self) -> dict:
        n = self.params.n
        return {b: block_mask(b, n) for b in self.blocks}

    @cached_property
    def codes(self) -> np.ndarray:
        """Sorted integer codes of a partite family (mixed radix n)."""
        if not self.partite:
            raise ParameterError("codes are only defined for partite families")
        if not self.blocks:
            return np.zeros(0, dtype=np.int64)
        arr = np.array([block_values(b) for b in self.blocks], dtype=np.int64)
        return np.sort(encode_values(arr, self.params.n))

    @cached_property
    def indicator(self) -> np.ndarray:
        """Boolean membership vector over all n**k tuples (partite only)."""
        ind = np.zeros(self.params.cube_size, dtype=bool)
        ind[self.codes] = True
        return ind

    def hyperplane_count(self, h: Hyperplane) -> int:
        return int(self.counts[h.coord, h.value])

    def union(self, other: "Family") -> "Family":
        return Family(self.params, self.blocks | other.blocks, check=False)

    def difference(self, other: "Family | Iterable[Block]") -> "Family":
        other_blocks = other.blocks if isinstance(other, Family) else frozenset(other)
        return Family(self.params, self.blocks - other_blocks, check=False)

    def intersection(self, other: "Family") -> "Family":
        return Family(self.params, self.blocks & other.blocks, check=False)


def encode_values(values: np.ndarray, n: int) -> np.ndarray:
    """Map rows of tuple values to integers, first coordinate most significant."""
    values = np.asarray(values, dtype=np.int64)
    k = values.shape[-1]
    weights = n ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return values @ weights


def decode_code(code: int, n: int, k: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        code, r = divmod(int(code), n)
        out.append(r)
    return tuple(reversed(out))


def full_cube(params: InstanceParams) -> Family:
    """The family [n]^k of all partite tuples."""
    blocks = (partite_block(v) for v in itertools.product(range(params.n), repeat=params.k))
    return Family(params, blocks, check=False)


def box_family(params: InstanceParams, ranges: Sequence[Iterable[int]]) -> Family:
    """Product family ``R_1 x ... x R_k`` for 0-based value sets ``R_j``."""
    if len(ranges) != params.k:
        raise ParameterError("need one value range per part")
    blocks = (partite_block(v) for v in itertools.product(*[sorted(set(r)) for r in ranges]))
    return Family(params, blocks)


def partite_family(params: InstanceParams, tuples: Iterable[Sequence[int]]) -> Family:
    """Family from 0-based value tuples."""
    out = []
    for t in tuples:
        if len(t) != params.k:
            raise ParameterError(f"tuple {tuple(t)} does not have k={params.k} entries")
        out.append(partite_block(t))
    return Family(params, out)


def _check_block(F: Family, X: Block) -> Block:
    return make_block(X, F.params)


def restrict_link(F: Family, X: Block) -> Family:
    """``F(X) = {B \\ X : X ⊆ B ∈ F}``."""
    X = _check_block(F, X)
    xs = set(X)
    out = [tuple(e for e in b if e not in xs) for b in F.blocks if xs.issubset(b)]
    return Family(F.params, out, check=False)


def restrict_star(F: Family, X: Block) -> Family:
    """``F[X] = {B ∈ F : X ⊆ B}``."""
    X = _check_block(F, X)
    xs = set(X)
    return Family(F.params, [b for b in F.blocks if xs.issubset(b)], check=False)


def restrict_exact(F: Family, X: Block, Y: Block) -> Family:
    """``F(X, Y) = {B \\ X : B ∩ Y = X}``; requires X ⊆ Y."""
    X = _check_block(F, X)
    Y = _check_block(F, Y)
    xs, ys = set(X), set(Y)
    if not xs <= ys:
        raise ParameterError("restrict_exact requires X ⊆ Y")
    out = [tuple(e for e in b if e not in xs) for b in F.blocks if ys.intersection(b) == xs]
    return Family(F.params, out, check=False)


def hyperplane_family(params: InstanceParams, h: Hyperplane) -> Family:
    if not (0 <= h.coord < params.k and 0 <= h.value < params.n):
        raise ParameterError(f"hyperplane {h} outside instance {params}")
    ranges = [range(params.n)] * params.k
    ranges[h.coord] = [h.value]
    return box_family(params, ranges)


@dataclass(frozen=True)
class FamilySystem:
    params: InstanceParams
    families: tuple
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        if len(self.families) != self.params.s:
            raise ValidationError(
                f"system declares s={self.params.s} but holds {len(self.families)} families"
            )
        for i, F in enumerate(self.families):
            if (F.params.n, F.params.k) != (self.params.n, self.params.k):
                raise ValidationError(f"family {i + 1} has params {F.params}, expected {self.params}")

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(F) for F in self.families)

    def __len__(self) -> int:
        return len(self.families)

    def __getitem__(self, i: int) -> Family:
        return self.families[i]

    def __iter__(self):
        return iter(self.families)


class PerfectMatching:
    """n pairwise disjoint tuples covering [k] x [n].

    Stored as ``perms`` of shape (k, n): row t is
    ``(perms[0][t], ..., perms[k-1][t])``.  The canonical form has
    ``perms[0]`` equal to the identity.
    """

    def __init__(self, params: InstanceParams, perms):
        perms = np.asarray(perms, dtype=np.int64)
        if perms.shape != (params.k, params.n):
            raise ParameterError(f"matching needs shape {(params.k, params.n)}, got {perms.shape}")
        for j in range(params.k):
            if sorted(perms[j].tolist()) != list(range(params.n)):
                raise ParameterError(f"part {j} of the matching is not a permutation")
        order = np.argsort(perms[0])
        self.params = params
        self.perms = perms[:, order]
        self.perms.setflags(write=False)

    @classmethod
    def from_rows(cls, params: InstanceParams, rows: Iterable[Sequence[int]]) -> "PerfectMatching":
        rows = np.asarray(list(rows), dtype=np.int64)
        if rows.ndim != 2 or rows.shape != (params.n, params.k):
            raise ParameterError(f"matching needs {params.n} rows of length {params.k}")
        return cls(params, rows.T)

    @property
    def rows(self) -> tuple:
        return tuple(tuple(int(x) for x in self.perms[:, t]) for t in range(self.params.n))

    @property
    def blocks(self) -> tuple:
        return tuple(partite_block(r) for r in self.rows)

    @property
    def codes(self) -> np.ndarray:
        return encode_values(self.perms.T, self.params.n)

    def __eq__(self, other) -> bool:
        return isinstance(other, PerfectMatching) and np.array_equal(self.perms, other.perms)

    def __hash__(self) -> int:
        return hash(self.perms.tobytes())

    def __repr__(self) -> str:
        return f"PerfectMatching({self.rows})"


# ---------------------------------------------------------------- documents

_FIELDS = ("n", "k", "s", "label", "families")


def _block_to_doc(block: Block, k: int):
    if len(block) == k:
        return [e.value + 1 for e in block]
    return [[e.part + 1, e.value + 1] for e in block]


def system_to_doc(system: FamilySystem) -> dict:
    p = system.params
    return {
        "n": p.n,
        "k": p.k,
        "s": p.s,
        "label": system.label,
        "families": [[_block_to_doc(b, p.k) for b in F] for F in system.families],
    }


def serialize(system: FamilySystem) -> str:
    """Canonical text form; blocks are emitted in sorted order."""
    doc = system_to_doc(system)
    lines = ["{"]
    for key in ("n", "k", "s", "label"):
        lines.append(f"  {json.dumps(key)}: {json.dumps(doc[key])},")
    lines.append('  "families": [')
    fams = doc["families"]
    for i, fam in enumerate(fams):
        sep = "," if i < len(fams) - 1 else ""
        lines.append("    " + json.dumps(fam, separators=(",", ":")) + sep)
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _parse_block(raw, params: InstanceParams, where: str) -> Block:
    if not isinstance(raw, list):
        raise ValidationError(f"{where}: block must be a list, got {raw!r}")
    if raw and all(isinstance(x, int) and not isinstance(x, bool) for x in raw):
        if len(raw) != params.k:
            raise ValidationError(f"{where}: abbreviated tuple needs k={params.k} values")
        pairs = [[j + 1, v] for j, v in enumerate(raw)]
    else:
        pairs = raw
    elements = []
    for pair in pairs:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)
        ):
            raise ValidationError(f"{where}: element {pair!r} is not a [part, value] pair")
        elements.append((pair[0] - 1, pair[1] - 1))
    try:
        return make_block(elements, params)
    except ParameterError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def system_from_doc(doc) -> FamilySystem:
    if not isinstance(doc, dict):
        raise ValidationError("document root must be an object")
    missing = [f for f in _FIELDS if f not in doc]
    if missing:
        raise ValidationError(f"missing field(s): {', '.join(missing)}")
    extra = sorted(set(doc) - set(_FIELDS))
    if extra:
        raise ValidationError(f"unknown field(s): {', '.join(extra)}")
    try:
        params = InstanceParams(doc["n"], doc["k"], doc["s"])
    except ParameterError as exc:
        raise ValidationError(f"params: {exc}") from None
    if not isinstance(doc["label"], str):
        raise ValidationError("field 'label' must be a string")
    fams = doc["families"]
    if not isinstance(fams, list):
        raise ValidationError("field 'families' must be a list")
    if len(fams) != params.s:
        raise ValidationError(f"field 'families' has {len(fams)} entries, s={params.s}")
    families = []
    for i, fam in enumerate(fams):
        if not isinstance(fam, list):
            raise ValidationError(f"families[{i}] must be a list of blocks")
        blocks = [_parse_block(b, params, f"families[{i}][{j}]") for j, b in enumerate(fam)]
        families.append(Family(params, blocks, check=False))
    return FamilySystem(params, families, doc["label"])


def deserialize(text: str) -> FamilySystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return system_from_doc(doc)


def random_family(params: InstanceParams, size: int, rng: np.random.Generator) -> Family:
    """Uniformly random partite family with exactly ``size`` tuples."""
    N = params.cube_size
    if not 0 <= size <= N:
        raise ParameterError(f"size must lie in [0, {N}]")
    codes = rng.choice(N, size=size, replace=False)
    return Family(params, (partite_block(decode_code(c, params.n, params.k)) for c in codes), check=False)
