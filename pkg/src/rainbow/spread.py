"""r-spreadness and the spread-approximation procedure.

A family is r-spread when ``|F(X)| <= r^-|X| |F|`` for every X.  The
approximation repeatedly picks an inclusion-maximal S with
``|F'(S)| >= r^-|S| |F'|``, records ``(S, F'[S])`` and deletes ``F'[S]``,
stopping once the chosen S has more than two elements or nothing is
left.  Core collections are then post-processed: an element lying in
``2s-1`` two-element cores is promoted to a singleton core, and a
collection with more than ``4(s-1)^2`` two-element cores is replaced by
``{∅}``.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

from .core import Block, Family, FamilySystem, InstanceParams, restrict_link
from .errors import ParameterError
from .matcher import find_rainbow


def _subsets(block: Block):
    for r in range(len(block) + 1):
        yield from itertools.combinations(block, r)


def link_sizes(F: Family) -> Counter:
    """``|F(X)|`` for every X contained in some block (including ∅)."""
    out: Counter = Counter()
    for b in F.blocks:
        out.update(_subsets(b))
    return out


def _le_scaled(count: int, r: float, size: int, total: int) -> bool:
    """``count <= r^-size * total`` evaluated as ``count * r^size <= total``."""
    return count * r**size <= total


def is_r_spread(F: Family, r: float) -> tuple[bool, Block | None]:
    """Check r-spreadness; the violator returned is the first in
    (size descending, lexicographic) order."""
    if r <= 1:
        raise ParameterError("r must exceed 1")
    if len(F) == 0:
        raise ParameterError("r-spreadness is undefined for an empty family")
    total = len(F)
    sizes = link_sizes(F)
    for X in sorted(sizes, key=lambda X: (-len(X), X)):
        if X and not _le_scaled(sizes[X], r, len(X), total):
            return False, X
    return True, None


def spread_threshold_r(s: int, k: int) -> float:
    """Default ``r = 2^5 s log2(sk)``."""
    return 2**5 * s * math.log2(s * k)


@dataclass(frozen=True)
class SpreadApproximation:
    r: float
    entries: tuple  # (core, attached family) pairs in selection order
    residual: Family
    source: Family
    stop_core: Block | None = None  # the |S| > 2 set that stopped the procedure
    empty_core_selected: bool = False
    property2: str = "NOT-APPLICABLE"

    @property
    def cores(self) -> tuple:
        return tuple(S for S, _ in self.entries)


def _qualifies(count: int, size: int, total: int, r: float) -> bool:
    return count * r**size >= total


def select_core(F: Family, r: float) -> Block:
    """Inclusion-maximal qualifying set: smallest cardinality, then lexicographic."""
    total = len(F)
    sizes = link_sizes(F)
    qual = [X for X, c in sizes.items() if _qualifies(c, len(X), total, r)]
    qual_set = set(qual)
    dominated: set = set()
    for T in qual:
        for Y in _subsets(T):
            if len(Y) < len(T):
                dominated.add(Y)
    maximal = [X for X in qual_set if X not in dominated]
    return min(maximal, key=lambda X: (len(X), X))


def spread_approximate(F: Family, r: float) -> SpreadApproximation:
    if r <= 1:
        raise ParameterError("r must exceed 1")
    working = F
    entries = []
    stop = None
    empty_selected = False
    while len(working):
        S = select_core(working, r)
        if len(S) > 2:
            stop = S
            break
        if not S:
            empty_selected = True
        xs = set(S)
        attached = Family(F.params, [b for b in working.blocks if xs.issubset(b)], check=False)
        entries.append((S, attached))
        working = working.difference(attached)
    prop2 = "NOT-APPLICABLE"
    if stop is not None and F.partite and F.params.n >= r:
        prop2 = "PASS" if len(working) <= r**3 * F.params.n ** (F.params.k - 3) else "FAIL"
    approx = SpreadApproximation(r, tuple(entries), working, F, stop, empty_selected, prop2)
    report = check_approximation(F, approx)
    if not (report.property1 and report.property3):
        raise AssertionError(f"spread approximation broke its own guarantees: {report}")
    if prop2 == "FAIL":
        raise AssertionError("residual exceeds r^3 n^(k-3) although n >= r")
    return approx


@dataclass(frozen=True)
class ApproximationReport:
    property1: bool  # coverage
    partition: bool  # every block attributed exactly once
    property2: str  # PASS / FAIL / NOT-APPLICABLE
    property3: bool  # every link r-spread
    failures: tuple = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.property1 and self.partition and self.property3 and self.property2 != "FAIL"


def check_approximation(F: Family, approx: SpreadApproximation) -> ApproximationReport:
    """Re-verify coverage, residual size and link spreadness from scratch."""
    failures = []
    cores = [set(S) for S, _ in approx.entries]
    uncovered = [b for b in F.blocks if b not in approx.residual and not any(c.issubset(b) for c in cores)]
    p1 = not uncovered
    if not p1:
        failures.append(f"property 1: {len(uncovered)} block(s) not covered")

    seen: Counter = Counter()
    for _, attached in approx.entries:
        seen.update(attached.blocks)
    seen.update(approx.residual.blocks)
    part = set(seen) == set(F.blocks) and all(v == 1 for v in seen.values())
    if not part:
        failures.append("blocks are not partitioned among entries and residual")

    p3 = True
    for S, attached in approx.entries:
        if not all(set(S).issubset(b) for b in attached.blocks):
            p3 = False
            failures.append(f"property 3: attached family of {S} has a block missing the core")
            continue
        if len(attached) == 0:
            continue
        ok, X = is_r_spread(restrict_link(attached, S), approx.r)
        if not ok:
            p3 = False
            failures.append(f"property 3: link of {S} violated by {X}")

    p2 = "NOT-APPLICABLE"
    if approx.stop_core is not None and F.partite and F.params.n >= approx.r:
        limit = approx.r**3 * F.params.n ** (F.params.k - 3)
        p2 = "PASS" if len(approx.residual) <= limit else "FAIL"
        if p2 == "FAIL":
            failures.append(f"property 2: residual {len(approx.residual)} > {limit}")
    return ApproximationReport(p1, part, p2, p3, tuple(failures))


# ---------------------------------------------------------- post-processing


def _two_cores(cores) -> list:
    return [S for S in cores if len(S) == 2]


def degree_reduce(collections, s: int) -> list[list]:
    """Promote elements lying in ``>= 2s-1`` two-element cores to singletons."""
    out = []
    for cores in collections:
        cores = sorted(set(tuple(S) for S in cores), key=lambda S: (len(S), S))
        while True:
            deg: Counter = Counter(e for S in _two_cores(cores) for e in S)
            heavy = sorted(e for e, d in deg.items() if d >= 2 * s - 1)
            if not heavy:
                break
            e = heavy[0]
            cores = [S for S in cores if not (len(S) == 2 and e in S)]
            if (e,) not in cores:
                cores.append((e,))
        singles = {S[0] for S in cores if len(S) == 1}
        cores = [S for S in cores if not (len(S) == 2 and singles.intersection(S))]
        out.append(sorted(set(cores), key=lambda S: (len(S), S)))
    return out


def cap_replace(collections, s: int) -> list[list]:
    """Replace any collection with more than ``4(s-1)^2`` two-element cores by ``{∅}``."""
    cap = 4 * (s - 1) ** 2
    return [[()] if len(_two_cores(c)) > cap else list(c) for c in collections]


def coverage(params: InstanceParams, cores) -> int:
    """``|A[S]|``: tuples of [n]^k containing at least one core."""
    cores = [set(S) for S in cores]
    count = 0
    for t in itertools.product(range(params.n), repeat=params.k):
        b = set(enumerate(t))
        if any(c <= b for c in cores):
            count += 1
    return count


def cores_system(params: InstanceParams, collections) -> FamilySystem:
    fams = [Family(params, [tuple(S) for S in c], check=True) for c in collections]
    return FamilySystem(params.with_s(len(fams)), fams, label="core collections")


def cores_cross_dependent(params: InstanceParams, collections) -> tuple[bool, tuple | None]:
    """Cross-dependence of the core collections, checked with the exact matcher."""
    rm = find_rainbow(cores_system(params, collections))
    return rm is None, (rm.assignment if rm else None)


@dataclass(frozen=True)
class PipelineResult:
    approximations: tuple
    reports: tuple
    reduced: tuple
    capped: tuple
    cores_cross_dependent: bool
    cross_matching: tuple | None


def spread_pipeline(system: FamilySystem, r: float | None = None) -> PipelineResult:
    p = system.params
    if r is None:
        r = spread_threshold_r(p.s, p.k)
    approxs = [spread_approximate(F, r) for F in system.families]
    reports = [check_approximation(F, a) for F, a in zip(system.families, approxs)]
    reduced = degree_reduce([a.cores for a in approxs], p.s)
    capped = cap_replace(reduced, p.s)
    dep, cm = cores_cross_dependent(p, capped)
    return PipelineResult(
        tuple(approxs), tuple(reports), tuple(map(tuple, reduced)), tuple(map(tuple, capped)), dep, cm
    )
