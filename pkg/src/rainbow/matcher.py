"""Rainbow matchings: exact search, Hall certificates, hyperplane absorption.

``find_rainbow`` is a complete backtracking search.  ``greedy_large_n``
is the constructive matcher for the regime ``n >= k^2 s^2`` where the
thresholds ``min(s-1, i) n^(k-1)`` force a matching; it absorbs heavy
hyperplanes, picks a representative of the last family outside the
chosen hyperplanes and then fills the remaining families from the back.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .core import (
    Block,
    Family,
    FamilySystem,
    GroundElement,
    Hyperplane,
    PerfectMatching,
    hyperplane_family,
)
from .errors import InvariantViolation, ParameterError, PreconditionError


@dataclass(frozen=True)
class RainbowMatching:
    """One block per family, pairwise disjoint; ``assignment[i]`` ∈ family i."""

    assignment: tuple

    def __len__(self):
        return len(self.assignment)


def is_rainbow(system: FamilySystem, assignment) -> bool:
    """Validity predicate: membership plus pairwise disjointness."""
    if len(assignment) != len(system.families):
        return False
    seen: set = set()
    for F, b in zip(system.families, assignment):
        if b not in F:
            return False
        if seen.intersection(b):
            return False
        seen.update(b)
    return True


def brute_force_rainbow(system: FamilySystem):
    """Enumerate every s-tuple of blocks; the oracle for ``find_rainbow``."""
    for combo in itertools.product(*[F.sorted_blocks for F in system.families]):
        if is_rainbow(system, combo):
            return RainbowMatching(tuple(combo))
    return None


def _bipartite_saturates(options: list[set]) -> bool:
    """True iff the left vertices (index of ``options``) can all be matched."""
    owner: dict = {}

    def augment(u, visited):
        for v in options[u]:
            if v in visited:
                continue
            visited.add(v)
            if v not in owner or augment(owner[v], visited):
                owner[v] = u
                return True
        return False

    return all(augment(u, set()) for u in range(len(options)))


@dataclass
class SearchStats:
    nodes: int = 0
    pruned: int = 0


def find_rainbow(system: FamilySystem, stats: SearchStats | None = None) -> RainbowMatching | None:
    """Return the first rainbow matching in canonical search order, or None.

    Families are visited in ascending size (ties by index), blocks in
    sorted order.  A node is cut when, for some part, the families still
    to be placed cannot receive distinct values in that part.
    """
    stats = stats if stats is not None else SearchStats()
    fams = system.families
    s = len(fams)
    if any(len(F) == 0 for F in fams):
        return None
    k = system.params.k
    order = sorted(range(s), key=lambda i: (len(fams[i]), i))
    candidates = []
    for i in order:
        F = fams[i]
        rows = []
        for b in F.sorted_blocks:
            partvals = [-1] * k
            for part, value in b:
                partvals[part] = value
            rows.append((b, F.masks[b], tuple(partvals)))
        candidates.append(rows)
    chosen: list = [None] * s

    def relaxation_ok(remaining) -> bool:
        for j in range(k):
            options = []
            for sel in remaining:
                vals = {pv[j] for _, _, pv in sel}
                if -1 in vals:
                    continue
                options.append(vals)
            if len(options) > 1 and not _bipartite_saturates(options):
                return False
        return True

    def search(depth: int, used: int) -> bool:
        stats.nodes += 1
        if depth == s:
            return True
        remaining = []
        for d in range(depth, s):
            sel = [c for c in candidates[d] if not c[1] & used]
            if not sel:
                stats.pruned += 1
                return False
            remaining.append(sel)
        if not relaxation_ok(remaining):
            stats.pruned += 1
            return False
        for b, mask, _ in remaining[0]:
            chosen[order[depth]] = b
            if search(depth + 1, used | mask):
                return True
        chosen[order[depth]] = None
        return False

    if not search(0, 0):
        return None
    result = RainbowMatching(tuple(chosen))
    if not is_rainbow(system, result.assignment):
        raise InvariantViolation("find_rainbow produced an invalid matching")
    return result


def is_cross_dependent(system: FamilySystem) -> bool:
    return find_rainbow(system) is None


# ------------------------------------------------------------------ Hall


@dataclass(frozen=True)
class HallCertificate:
    """Either a system of distinct representatives or a Hall-violating set.

    Family and row indices are 0-based; rows are indexed by the first
    coordinate of the matching tuple.
    """

    kind: str  # "SDR" or "VIOLATING"
    sdr: dict = field(default_factory=dict)
    violating: tuple = ()
    neighborhood: tuple = ()
    edges: dict = field(default_factory=dict)


def matching_graph(system: FamilySystem, M: PerfectMatching) -> dict:
    """Adjacency of G_M: family index -> sorted row indices it contains."""
    if (M.params.n, M.params.k) != (system.params.n, system.params.k):
        raise ParameterError("matching and system have different (n, k)")
    rows = M.blocks
    return {i: tuple(t for t, r in enumerate(rows) if r in F) for i, F in enumerate(system.families)}


def hall_certificate(system: FamilySystem, M: PerfectMatching) -> HallCertificate:
    graph = matching_graph(system, M)
    s = len(system.families)
    row_owner: dict = {}
    fam_row: dict = {}

    def augment(u, visited):
        for t in graph[u]:
            if t in visited:
                continue
            visited.add(t)
            if t not in row_owner or augment(row_owner[t], visited):
                row_owner[t] = u
                fam_row[u] = t
                return True
        return False

    for u in range(s):
        augment(u, set())

    if len(fam_row) == s:
        return HallCertificate("SDR", sdr=dict(sorted(fam_row.items())), edges=graph)

    # families reachable by alternating paths from unmatched families
    unmatched = [u for u in range(s) if u not in fam_row]
    reach = set(unmatched)
    rows_seen: set = set()
    queue = deque(unmatched)
    while queue:
        u = queue.popleft()
        for t in graph[u]:
            if t in rows_seen:
                continue
            rows_seen.add(t)
            w = row_owner.get(t)
            if w is not None and w not in reach:
                reach.add(w)
                queue.append(w)
    B = tuple(sorted(reach))
    nbhd = tuple(sorted({t for u in B for t in graph[u]}))
    if len(nbhd) >= len(B):
        raise InvariantViolation("deficiency set does not violate Hall's condition")
    return HallCertificate("VIOLATING", violating=B, neighborhood=nbhd, edges=graph)


# ------------------------------------------------------------ absorption


def absorption_threshold(n: int, k: int, s: int) -> float:
    """``(s-1)(k-1) n^(k-2)``; rational when k < 2."""
    if k >= 2:
        return (s - 1) * (k - 1) * n ** (k - 2)
    return 0


@dataclass(frozen=True)
class AbsorptionDecomposition:
    hyperplanes: tuple  # absorbed, in absorption order
    residual: Family
    threshold: int
    counts_at_absorption: tuple

    @property
    def t(self) -> int:
        return len(self.hyperplanes)


def absorb_hyperplanes(F: Family, s: int) -> AbsorptionDecomposition:
    """Strip hyperplanes holding more than ``(s-1)(k-1)n^(k-2)`` blocks.

    The scan restarts from the first hyperplane (coord, then value)
    after every absorption.
    """
    if not F.partite:
        raise ParameterError("absorb_hyperplanes needs a partite family")
    n, k = F.params.n, F.params.k
    thr = absorption_threshold(n, k, s)
    working = set(F.blocks)
    counts = F.counts.copy()
    absorbed, at_time = [], []
    while True:
        hit = None
        for j in range(k):
            for a in range(n):
                if counts[j, a] > thr:
                    hit = (j, a)
                    break
            if hit:
                break
        if hit is None:
            break
        j, a = hit
        at_time.append(int(counts[j, a]))
        absorbed.append(Hyperplane(j, a))
        el = GroundElement(j, a)
        gone = [b for b in working if el in b]
        for b in gone:
            working.discard(b)
            for part, value in b:
                counts[part, value] -= 1
    residual = Family(F.params, working, check=False)
    return AbsorptionDecomposition(tuple(absorbed), residual, thr, tuple(at_time))


def _contains(block: Block, h: Hyperplane) -> bool:
    return GroundElement(h.coord, h.value) in block


def greedy_large_n(system: FamilySystem) -> RainbowMatching:
    """Constructive rainbow matching for n >= k^2 s^2 and |F_i| > min(s-1, i) n^(k-1)."""
    p = system.params
    n, k, s = p.n, p.k, p.s
    fams = system.families
    if n < k * k * s * s:
        raise PreconditionError(f"preconditions of the large-n greedy matcher not met: n={n} < k^2 s^2={k * k * s * s}")
    for i, F in enumerate(fams, start=1):
        if not F.partite:
            raise PreconditionError("preconditions of the large-n greedy matcher not met: families must be partite")
        if len(F) <= min(s - 1, i) * n ** (k - 1):
            raise PreconditionError(
                f"preconditions of the large-n greedy matcher not met: |F_{i}|={len(F)} <= {min(s - 1, i) * n ** (k - 1)}"
            )

    decomp = [absorb_hyperplanes(F, s) for F in fams]
    selected: dict = {}  # 0-based family index -> Hyperplane
    taken: set = set()
    for i in range(s - 1):
        if decomp[i].t >= i + 1:
            h = next((h for h in decomp[i].hyperplanes if h not in taken), None)
            if h is None:
                raise InvariantViolation("no distinct absorbed hyperplane available")
            selected[i] = h
            taken.add(h)

    chosen: list = [None] * s
    used: set = set()

    def pick(pool, i):
        others = [h for j, h in selected.items() if j != i]
        for b in pool:
            if used.intersection(b):
                continue
            if any(_contains(b, h) for h in others):
                continue
            return b
        raise InvariantViolation(f"greedy matcher could not extend at family {i + 1}")

    chosen[s - 1] = pick(fams[s - 1].sorted_blocks, s - 1)
    used.update(chosen[s - 1])
    for i in range(s - 2, -1, -1):
        if i in selected:
            pool = hyperplane_family(p, selected[i]).sorted_blocks
        else:
            pool = decomp[i].residual.sorted_blocks
        chosen[i] = pick(pool, i)
        used.update(chosen[i])

    # Blocks taken from a full hyperplane may lie outside the original
    # family; undo absorptions in reverse, swapping in a disjoint block.
    for i in range(s):
        F = fams[i]
        hs = decomp[i].hyperplanes
        for t in range(len(hs) - 1, -1, -1):
            b = chosen[i]
            if b in F or any(_contains(b, h) for h in hs[:t]):
                continue
            if not _contains(b, hs[t]):
                continue
            rest: set = set()
            for j, c in enumerate(chosen):
                if j != i:
                    rest.update(c)
            earlier = hs[:t]
            swap = None
            for c in hyperplane_family(p, hs[t]).sorted_blocks:
                if rest.intersection(c):
                    continue
                if c in F or any(_contains(c, h) for h in earlier):
                    swap = c
                    break
            if swap is None:
                raise InvariantViolation("absorption could not be undone")
            chosen[i] = swap

    result = RainbowMatching(tuple(chosen))
    if not is_rainbow(system, result.assignment):
        raise InvariantViolation("greedy matcher produced an invalid matching")
    return result
