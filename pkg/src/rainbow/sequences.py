"""Threshold sequences, the dominance order, extremal constructions and
exact witness search.

A sequence ``f_1 <= ... <= f_s`` is *satisfying* when ``|F_i| > f_i`` for
all ``i`` forces a rainbow matching.  Values are kept exact where
possible (``int`` or ``Fraction``); irrational thresholds are floats and
are compared to integer sizes with Python's exact int/float comparison.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    Family,
    FamilySystem,
    InstanceParams,
    box_family,
    full_cube,
    partite_block,
)
from .errors import ParameterError
from .matcher import find_rainbow, is_cross_dependent, is_rainbow

Real = "int | Fraction | float"


def _normalize(x):
    if isinstance(x, bool):
        raise ParameterError("threshold values must be numbers")
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            raise ParameterError("threshold values must be finite")
        return x
    if isinstance(x, int):
        return x
    raise ParameterError(f"unsupported threshold value {x!r}")


@dataclass(frozen=True)
class ThresholdSequence:
    values: tuple
    params: InstanceParams

    def __post_init__(self):
        vals = tuple(_normalize(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.params.s:
            raise ParameterError(f"sequence has {len(vals)} values, s={self.params.s}")
        if any(v < 0 for v in vals):
            raise ParameterError("thresholds must be nonnegative")
        if any(a > b for a, b in zip(vals, vals[1:])):
            raise ParameterError("thresholds must be nondecreasing (use sorted order)")

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def min_sizes(self) -> tuple[int, ...]:
        """Smallest integer sizes strictly exceeding each threshold."""
        return tuple(math.floor(v) + 1 for v in self.values)

    @classmethod
    def sorted_from(cls, values, params: InstanceParams) -> "ThresholdSequence":
        return cls(tuple(sorted(_normalize(v) for v in values)), params)


def format_value(x) -> str:
    """Decimal string form; ``p/q`` for non-integral rationals."""
    x = _normalize(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return repr(x)


def parse_value(text: str):
    text = text.strip()
    try:
        if "/" in text:
            return _normalize(Fraction(text))
        if any(c in text for c in ".eE") or text.lower() in ("inf", "nan"):
            return _normalize(float(text))
        return int(text)
    except (ValueError, ZeroDivisionError):
        raise ParameterError(f"cannot parse threshold {text!r}") from None


def dominates(f: ThresholdSequence, g: ThresholdSequence) -> bool:
    """``f ⪯ g``: coordinatewise ``f_i <= g_i``."""
    if len(f) != len(g):
        raise ParameterError("sequences have different lengths")
    if (f.params.n, f.params.k) != (g.params.n, g.params.k):
        raise ParameterError("sequences belong to different instances")
    return all(a <= b for a, b in zip(f, g))


# ------------------------------------------------------------- formulas


def _pow(n: int, e: int):
    return n**e if e >= 0 else Fraction(1, n ** (-e))


def _log2_int_or_float(x: int):
    if x > 0 and x & (x - 1) == 0:
        return x.bit_length() - 1
    return math.log2(x)


def seq_uniform_AH(params: InstanceParams) -> ThresholdSequence:
    n, k, s = params.n, params.k, params.s
    return ThresholdSequence(tuple((s - 1) * _pow(n, k - 1) for _ in range(s)), params)


def seq_linear(params: InstanceParams) -> ThresholdSequence:
    n, k, s = params.n, params.k, params.s
    return ThresholdSequence(tuple(i * _pow(n, k - 1) for i in range(1, s + 1)), params)


def seq_truncated(params: InstanceParams, C: float = 20.0) -> ThresholdSequence:
    """``min(s-1, i + C sqrt(s ln s)) n^(k-1)``; the logarithm is natural."""
    if C <= 0:
        raise ParameterError("C must be positive")
    n, k, s = params.n, params.k, params.s
    shift = C * math.sqrt(s * math.log(s))
    vals = []
    for i in range(1, s + 1):
        if i + shift >= s - 1:
            vals.append((s - 1) * _pow(n, k - 1))
        else:
            vals.append((i + shift) * n ** (k - 1))
    return ThresholdSequence(tuple(vals), params)


def seq_thm_main3(params: InstanceParams) -> ThresholdSequence:
    """``(i-1) n^(k-1) + 4(s-1)^2 n^(k-2) + 2^15 s^3 log2^3(sk) n^(k-3)``."""
    n, k, s = params.n, params.k, params.s
    L = _log2_int_or_float(s * k)
    tail = 2**15 * s**3 * L**3 * _pow(n, k - 3)
    if isinstance(L, float):
        tail = float(tail)
    base = 4 * (s - 1) ** 2 * _pow(n, k - 2) + tail
    return ThresholdSequence(tuple((i - 1) * _pow(n, k - 1) + base for i in range(1, s + 1)), params)


def seq_claim4(params: InstanceParams) -> ThresholdSequence:
    """``(i-1) n^(k-1) + ceil(s/2) floor(s/2) n^(k-2) - 1``, refuted for n >= s^2/2."""
    n, k, s = params.n, params.k, params.s
    m = -(-s // 2) * (s // 2) * _pow(n, k - 2)
    return ThresholdSequence(tuple((i - 1) * _pow(n, k - 1) + m - 1 for i in range(1, s + 1)), params)


def linear_dominance_threshold(s: int, k: int) -> float:
    """``max(2^8 s^(3/2) log2^(3/2)(sk), 8 s^2)``."""
    return max(2**8 * s**1.5 * math.log2(s * k) ** 1.5, 8 * s * s)


SEQUENCE_KINDS = {
    "uniform": seq_uniform_AH,
    "linear": seq_linear,
    "truncated": seq_truncated,
    "main3": seq_thm_main3,
    "claim4": seq_claim4,
}


# --------------------------------------------------------- constructions


def claim1_sizes(params: InstanceParams) -> tuple[int, ...]:
    n, k, s = params.n, params.k, params.s
    first = (s - 1) * (n ** (k - 1) - (n - 1) ** (k - 1))
    return (first,) + ((s - 1) * n ** (k - 1) + 1,) * (s - 1)


def construct_claim1(params: InstanceParams, b: int = 0) -> FamilySystem:
    """The cross-dependent system with a small first family.

    ``b`` (0-based) fixes the extra tuple ``F = (s, b, ..., b)``.
    """
    n, k, s = params.n, params.k, params.s
    if s < 2 or n < 2 or k < 2:
        raise ParameterError("construct_claim1 needs s >= 2, n >= 2, k >= 2")
    if s > n:
        raise ParameterError("construct_claim1 needs s <= n (F has first coordinate s)")
    if not 0 <= b < n:
        raise ParameterError(f"b must lie in [n], got {b + 1}")
    extra = partite_block((s - 1,) + (b,) * (k - 1))
    base = box_family(params, [range(s - 1)] + [range(n)] * (k - 1))
    hits = set(extra)
    F1 = Family(params, [B for B in base.blocks if hits.intersection(B)], check=False)
    rest = Family(params, base.blocks | {extra}, check=False)
    system = FamilySystem(params, [F1] + [rest] * (s - 1), label=f"claim1 n={n} k={k} s={s} b={b + 1}")
    if system.sizes != claim1_sizes(params):
        raise AssertionError(f"claim1 sizes {system.sizes} != {claim1_sizes(params)}")
    return system


def claim3_sizes(params: InstanceParams) -> tuple[int, ...]:
    n, k, s = params.n, params.k, params.s
    m = -(-s // 2) * (s // 2) * n ** (k - 2)
    return (m,) + (s * n ** (k - 1) - m,) * (s - 1)


def construct_claim3(params: InstanceParams) -> FamilySystem:
    """Pigeonhole construction on the first two parts; even s only."""
    n, k, s = params.n, params.k, params.s
    if s % 2:
        raise ParameterError("construct_claim3 is only defined for even s")
    if k < 2:
        raise ParameterError("construct_claim3 needs k >= 2")
    h = s // 2
    if n < h:
        raise ParameterError("construct_claim3 needs n >= s/2")
    F1 = box_family(params, [range(h), range(h)] + [range(n)] * (k - 2))
    A = box_family(params, [range(h)] + [range(n)] * (k - 1))
    B = box_family(params, [range(n), range(h)] + [range(n)] * (k - 2))
    rest = A.union(B)
    system = FamilySystem(params, [F1] + [rest] * (s - 1), label=f"claim3 n={n} k={k} s={s}")
    if system.sizes != claim3_sizes(params):
        raise AssertionError(f"claim3 sizes {system.sizes} != {claim3_sizes(params)}")
    return system


def exceeds(system: FamilySystem, f: ThresholdSequence) -> bool:
    return all(size > v for size, v in zip(system.sizes, f))


def is_counterexample_for(system: FamilySystem, f: ThresholdSequence) -> bool:
    """Sizes beat every threshold and yet no rainbow matching exists."""
    if len(f) != len(system) or (f.params.n, f.params.k) != (system.params.n, system.params.k):
        raise ParameterError("sequence and system do not match")
    return exceeds(system, f) and is_cross_dependent(system)


# -------------------------------------------------------- witness search

SATISFYING = "SATISFYING-VERIFIED"
WITNESS = "WITNESS-FOUND"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class WitnessReport:
    status: str
    witness: FamilySystem | None
    nodes_explored: int
    symmetry_group_order: int = 1


class _BudgetExhausted(Exception):
    pass


def symmetry_maps(params: InstanceParams, limit: int = 5000) -> list[tuple[int, ...]]:
    """Permutations of tuple codes induced by value and part permutations.

    Returns only the identity when the group has more than ``limit``
    elements.
    """
    n, k = params.n, params.k
    cube = list(itertools.product(range(n), repeat=k))
    code = {t: i for i, t in enumerate(cube)}
    order = math.factorial(n) ** k * math.factorial(k)
    if order > limit:
        return [tuple(range(len(cube)))]
    maps = []
    for part_perm in itertools.permutations(range(k)):
        for value_perms in itertools.product(itertools.permutations(range(n)), repeat=k):
            m = []
            for t in cube:
                image = tuple(value_perms[j][t[part_perm[j]]] for j in range(k))
                m.append(code[image])
            maps.append(tuple(m))
    return maps


def _apply(mask: int, mapping) -> int:
    out = 0
    i = 0
    while mask:
        if mask & 1:
            out |= 1 << mapping[i]
        mask >>= 1
        i += 1
    return out


def witness_search(
    params: InstanceParams,
    f: ThresholdSequence,
    budget: int = 100_000,
    symmetry: bool = True,
) -> WitnessReport:
    """Decide whether ``f`` is satisfying on ``[n]^k`` by exhaustive search.

    The search grows exclusion sets ``E_i`` (blocks removed from the full
    cube for family ``i``) with ``|E_i| <= n^k - (floor(f_i) + 1)``.  At
    every node the complement system is searched for a rainbow matching;
    if one exists, the search branches on which of its blocks to exclude.
    A complement system without rainbow matching is a witness that ``f``
    is not satisfying.  States are deduplicated up to the symmetry group
    of the cube.
    """
    if len(f) != params.s or (f.params.n, f.params.k) != (params.n, params.k):
        raise ParameterError("sequence does not match instance")
    n, k, s = params.n, params.k, params.s
    cube = [partite_block(t) for t in itertools.product(range(n), repeat=k)]
    N = len(cube)
    caps = [N - m for m in f.min_sizes()]
    if min(caps) < 0:
        # some |F_i| > f_i is unattainable, so the condition is vacuous
        return WitnessReport(SATISFYING, None, 0)
    index = {b: i for i, b in enumerate(cube)}
    maps = symmetry_maps(params) if symmetry else [tuple(range(N))]
    full = (1 << N) - 1
    seen: set = set()
    nodes = 0

    def complement(E) -> FamilySystem:
        fams = []
        for e in E:
            keep = full & ~e
            fams.append(Family(params, [cube[i] for i in range(N) if keep >> i & 1], check=False))
        return FamilySystem(params, fams)

    def canonical(E) -> tuple:
        return min(tuple(_apply(e, m) for e in E) for m in maps)

    def dfs(E):
        nonlocal nodes
        key = canonical(E)
        if key in seen:
            return None
        seen.add(key)
        nodes += 1
        if nodes > budget:
            raise _BudgetExhausted
        system = complement(E)
        rm = find_rainbow(system)
        if rm is None:
            return system
        for i, b in enumerate(rm.assignment):
            if bin(E[i]).count("1") >= caps[i]:
                continue
            E2 = list(E)
            E2[i] |= 1 << index[b]
            found = dfs(tuple(E2))
            if found is not None:
                return found
        return None

    try:
        found = dfs(tuple(0 for _ in range(s)))
    except _BudgetExhausted:
        return WitnessReport(INCONCLUSIVE, None, nodes, len(maps))
    if found is None:
        return WitnessReport(SATISFYING, None, nodes, len(maps))
    need = f.min_sizes()
    trimmed = FamilySystem(
        params,
        [Family(params, F.sorted_blocks[:m], check=False) for F, m in zip(found.families, need)],
        label=f"witness for ({', '.join(format_value(v) for v in f)})",
    )
    if not (exceeds(trimmed, f) and find_rainbow(trimmed) is None):
        raise AssertionError("witness failed re-validation")
    return WitnessReport(WITNESS, trimmed, nodes, len(maps))


def brute_force_satisfying(params: InstanceParams, f: ThresholdSequence) -> bool:
    """Total enumeration over every family system; tiny instances only."""
    cube = full_cube(params).sorted_blocks
    N = len(cube)
    if N * params.s > 20:
        raise ParameterError("brute force limited to n^k * s <= 20")
    need = f.min_sizes()
    subsets = []
    for m in need:
        subsets.append(
            [c for r in range(max(m, 0), N + 1) for c in itertools.combinations(cube, r)]
        )
    for combo in itertools.product(*subsets):
        ok = False
        for pick in itertools.product(*combo):
            seen: set = set()
            good = True
            for b in pick:
                if seen.intersection(b):
                    good = False
                    break
                seen.update(b)
            if good:
                ok = True
                break
        if not ok:
            return False
    return True
