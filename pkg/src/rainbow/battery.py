"""Desk-scale reproduction battery behind ``rainbow reproduce``.

Each check returns ``(passed, detail)``.  Constructors and kernels are
looked up through ``hooks`` so a caller can swap in a deliberately
broken implementation and watch the corresponding row fail.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import matcher, nullstellensatz as cn, randmatch, sequences, spread
from .core import (
    Family,
    FamilySystem,
    Hyperplane,
    InstanceParams,
    full_cube,
    hyperplane_family,
    partite_block,
    random_family,
)


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float


DEFAULT_HOOKS = {
    "construct_claim1": sequences.construct_claim1,
    "construct_claim3": sequences.construct_claim3,
    "find_rainbow": matcher.find_rainbow,
    "vandermonde_sq_coefficient": cn.vandermonde_sq_coefficient,
    "greedy_large_n": matcher.greedy_large_n,
}


def claim1_check(h, seed):
    notes = []
    for nks in [(4, 2, 2), (4, 2, 3), (5, 3, 3)]:
        p = InstanceParams(*nks)
        try:
            system = h["construct_claim1"](p)
        except AssertionError as exc:
            return False, f"{nks}: {exc}"
        if system.sizes != sequences.claim1_sizes(p):
            return False, f"{nks}: sizes {system.sizes}"
        if h["find_rainbow"](system) is not None:
            return False, f"{nks}: rainbow matching found"
        notes.append(f"{nks}:{system.sizes}")
    return True, " ".join(notes)


def claim3_check(h, seed):
    notes = []
    for nks in [(4, 2, 2), (4, 3, 2)]:
        p = InstanceParams(*nks)
        try:
            system = h["construct_claim3"](p)
        except AssertionError as exc:
            return False, f"{nks}: {exc}"
        if system.sizes != sequences.claim3_sizes(p) or h["find_rainbow"](system) is not None:
            return False, f"{nks}: sizes {system.sizes} or not cross-dependent"
        notes.append(f"{nks}:{system.sizes}")
    p = InstanceParams(2, 2, 2)
    system = h["construct_claim3"](p)
    g = sequences.seq_claim4(p)
    ok = sequences.is_counterexample_for(system, g) and h["find_rainbow"](system) is None
    return ok, " ".join(notes) + f" counterexample vs g={g.values}: {ok}"


def nullstellensatz_check(h, seed):
    checked = 0
    for s in (2, 3, 4):
        for p in (5, 7, 11):
            for f in cn.exponent_vectors(s, nondecreasing=False):
                if h["vandermonde_sq_coefficient"](s, f, p) != cn.naive_coefficient_oracle(s, f, p):
                    return False, f"mismatch at s={s} p={p} f={f}"
                checked += 1
    for s in range(1, 8):
        if cn.uniform_magnitude(s) != cn.math.factorial(s):
            return False, f"uniform coefficient magnitude wrong at s={s}"
    cert = cn.certify_sequence_k2(7, (2, 2, 2))
    if not (cert.valid and cert.satisfying_sequence == (14, 14, 14)):
        return False, "p=7 f=(2,2,2) does not reproduce (s-1)p"
    return True, f"{checked} vectors agree; |coef(s-1,...)| = s! for s<=7; (14,14,14) certified"


def soundness_check(h, seed, systems: int = 100):
    rng = np.random.default_rng(seed)
    total = 0
    for p in (5, 7):
        for s in (1, 2, 3):
            for cert in cn.catalog_certificates(s, p):
                if not cert.valid:
                    continue
                params = InstanceParams(p, 2, s)
                for _ in range(systems):
                    fams = []
                    for m in cert.satisfying_sequence:
                        size = int(rng.integers(m + 1, p * p + 1))
                        fams.append(random_family(params, size, rng))
                    system = FamilySystem(params, fams)
                    rm = h["find_rainbow"](system)
                    if rm is None or not matcher.is_rainbow(system, rm.assignment):
                        return False, f"no rainbow matching for p={p} f={cert.f}"
                    total += 1
    return True, f"{total} random systems matched"


def concentration_check(h, seed, trials: int = 10_000):
    params = InstanceParams(30, 3)
    rng = np.random.default_rng(seed)
    worst = []
    for alpha in (0.05, 0.1, 0.2):
        F = random_family(params, round(alpha * params.cube_size), rng)
        rep = randmatch.check_concentration(F, trials, (1, 2, 4, 8), seed)
        if not rep.ok:
            return False, f"alpha={alpha}: {rep.flags} flagged rows"
        worst.append(max(r.frequency - r.bound for r in rep.rows))
    return True, f"max(freq - bound) per alpha = {[round(w, 4) for w in worst]}"


def anticoncentration_family() -> tuple[Family, Fraction]:
    params = InstanceParams(10, 4)
    F = hyperplane_family(params, Hyperplane(0, 0)).union(hyperplane_family(params, Hyperplane(0, 1)))
    F = F.union(Family(params, [partite_block((2, 0, 0, 0))], check=False))
    # xi = 2 + [(3,1,1,1) in M] and a fixed tuple lies in M with probability n^(1-k)
    return F, Fraction(1, params.n ** (params.k - 1))


def anticoncentration_check(h, seed):
    F, pF = anticoncentration_family()
    s, n = 3, 10
    if len(F) != (s - 1) * n**3 + 1 or pF > Fraction(1, 4 * n * (s - 1)):
        return False, "fixture does not meet the hypotheses"
    c = randmatch.classify_hyperplanes(F, pF, s)
    first = c.coordinates[0]
    ok = (
        c.fat_count == s - 1
        and c.parallel
        and first.case == randmatch.FAT_THIN
        and first.fat == (0, 1)
        and all(x.case == randmatch.BOUNDED for x in c.coordinates[1:])
    )
    return ok, f"fat={[(i + 1, a + 1) for i, a in c.fat_hyperplanes]} cases={[x.case for x in c.coordinates]}"


def mixing_check(h, seed, samples: int = 200):
    sub = InstanceParams(3, 2)
    cube = full_cube(sub).sorted_blocks
    for bits in range(1 << len(cube)):
        P = Family(sub, [b for i, b in enumerate(cube) if bits >> i & 1], check=False)
        if randmatch.disjoint_pair_count(P) < randmatch.mixing_bound(3, 3, len(P)):
            return False, f"n=3 subset {bits} violates the bound"
    rng = np.random.default_rng(seed)
    sub4 = InstanceParams(4, 2)
    for _ in range(samples):
        P = random_family(sub4, int(rng.integers(0, 17)), rng)
        if randmatch.disjoint_pair_count(P) < randmatch.mixing_bound(4, 3, len(P)):
            return False, "random n=4 subset violates the bound"
    return True, f"512 subsets at n=3 and {samples} random at n=4"


def postprocess_invariants(params: InstanceParams, collections, s: int) -> str | None:
    reduced = spread.degree_reduce(collections, s)
    for before, after in zip(collections, reduced):
        deg = {}
        for S in after:
            if len(S) == 2:
                for e in S:
                    deg[e] = deg.get(e, 0) + 1
        if any(d > 2 * (s - 1) for d in deg.values()):
            return "degree_reduce left an element of degree >= 2s-1"
        singles = {S[0] for S in after if len(S) == 1}
        if any(len(S) == 2 and singles.intersection(S) for S in after):
            return "degree_reduce kept a pair containing a singleton core"
        if spread.coverage(params, after) < spread.coverage(params, before):
            return "degree_reduce decreased coverage"
    capped = spread.cap_replace(reduced, s)
    cap = 4 * (s - 1) ** 2
    for c in capped:
        if c != [()] and sum(len(S) == 2 for S in c) > cap:
            return "cap_replace left too many pairs"
    return None


def spread_check(h, seed, families: int = 50):
    params = InstanceParams(6, 3)
    rng = np.random.default_rng(seed)
    p2_asserted = 0
    for _ in range(families):
        F = random_family(params, int(rng.integers(1, params.cube_size + 1)), rng)
        for r in (2, 4):
            approx = spread.spread_approximate(F, r)
            rep = spread.check_approximation(F, approx)
            if not (rep.property1 and rep.partition and rep.property3):
                return False, f"lemma property failure: {rep.failures}"
            if approx.stop_core is not None and params.n >= r:
                if rep.property2 != "PASS":
                    return False, "property 2 failed"
                p2_asserted += 1
            for s in (2, 3):
                err = postprocess_invariants(params, [approx.cores], s)
                if err:
                    return False, err
    return True, f"{families} families x r in (2, 4); property 2 asserted {p2_asserted} times"


def witness_frontier_check(h, seed):
    params = InstanceParams(2, 2, 2)
    rows = []
    for f in itertools.combinations_with_replacement(range(5), 2):
        seq = sequences.ThresholdSequence(f, params)
        rep = sequences.witness_search(params, seq)
        got = rep.status == sequences.SATISFYING
        if rep.status == sequences.INCONCLUSIVE or got != sequences.brute_force_satisfying(params, seq):
            return False, f"frontier mismatch at f={f}"
        rows.append((f, got))
    sat = [f for f, ok in rows if ok]
    return True, f"{len(rows)} sequences; satisfying: {sat}"


def greedy_check(h, seed, systems: int = 100):
    params = InstanceParams(16, 2, 2)
    rng = np.random.default_rng(seed)
    for _ in range(systems):
        fams = []
        for i in range(1, 3):
            low = min(params.s - 1, i) * params.n + 1
            fams.append(random_family(params, int(rng.integers(low, low + 48)), rng))
        system = FamilySystem(params, fams)
        rm = h["greedy_large_n"](system)
        if not matcher.is_rainbow(system, rm.assignment):
            return False, "greedy output failed validation"
    return True, f"{systems} systems matched"


def field_check(h, seed):
    for p in (3, 5, 7, 11):
        rep = cn.verify_claim_zp(cn.QuadExtField.for_prime(p))
        if not rep.ok:
            return False, f"p={p}: {len(rep.failures)} failures"
    return True, "p in (3, 5, 7, 11) exhaustive"


CRITERIA = [
    ("1 single-heavy construction", claim1_check, 10),
    ("2 pigeonhole construction", claim3_check, 10),
    ("3 nullstellensatz coefficients", nullstellensatz_check, 30),
    ("4 certificate soundness", soundness_check, 120),
    ("5 concentration", concentration_check, 120),
    ("6 anticoncentration", anticoncentration_check, 30),
    ("7 mixing bound", mixing_check, 60),
    ("8 spread engine", spread_check, 120),
    ("9 witness search frontier", witness_frontier_check, 60),
    ("10 greedy matcher", greedy_check, 60),
    ("11 field layer", field_check, 10),
]


def run_battery(seed: int = 0, hooks: dict | None = None, only=None) -> list[CriterionResult]:
    h = dict(DEFAULT_HOOKS)
    h.update(hooks or {})
    out = []
    for name, fn, limit in CRITERIA:
        if only is not None and not any(name.startswith(f"{o} ") for o in only):
            continue
        t0 = time.perf_counter()
        try:
            passed, detail = fn(h, seed)
        except Exception as exc:  # a broken hook must fail its row, not the run
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        if dt > limit:
            passed, detail = False, f"{detail} (took {dt:.1f}s > {limit}s)"
        out.append(CriterionResult(name, passed, detail, dt, limit))
    return out
