"""Random perfect matchings of [n]^k and the statistics of xi_F = |F ∩ M|.

Matchings are drawn as ``k-1`` independent uniform permutations (the
first coordinate is the identity).  Whenever ``(n!)^(k-1)`` is small the
estimators switch to exact enumeration and return ``Fraction``
probabilities.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import (
    Family,
    InstanceParams,
    PerfectMatching,
    partite_block,
)
from .errors import ParameterError

EXACT_LIMIT = 10**6


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def sample_matching(params: InstanceParams, rng: np.random.Generator) -> PerfectMatching:
    n, k = params.n, params.k
    perms = [np.arange(n)] + [rng.permutation(n) for _ in range(k - 1)]
    return PerfectMatching(params, np.array(perms))


def matching_count(params: InstanceParams) -> int:
    return math.factorial(params.n) ** (params.k - 1)


def all_matchings(params: InstanceParams):
    n, k = params.n, params.k
    ident = tuple(range(n))
    for rest in itertools.product(itertools.permutations(range(n)), repeat=k - 1):
        yield PerfectMatching(params, np.array((ident,) + rest))


def _sampled_codes(params: InstanceParams, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Row codes of ``trials`` random matchings, shape (trials, n)."""
    n, k = params.n, params.k
    codes = np.broadcast_to(np.arange(n, dtype=np.int64) * n ** (k - 1), (trials, n)).copy()
    base = np.tile(np.arange(n, dtype=np.int64), (trials, 1))
    for j in range(1, k):
        codes += rng.permuted(base, axis=1) * n ** (k - 1 - j)
    return codes


def _all_codes(params: InstanceParams) -> np.ndarray:
    """Row codes of every canonical matching, shape ((n!)^(k-1), n)."""
    n, k = params.n, params.k
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    codes = (np.arange(n, dtype=np.int64) * n ** (k - 1))[None, :]
    for j in range(1, k):
        w = n ** (k - 1 - j)
        codes = (codes[:, None, :] + perms[None, :, :] * w).reshape(-1, n)
    return codes


def xi(F: Family, M: PerfectMatching) -> int:
    """``|F ∩ M|``."""
    if not F.partite:
        raise ParameterError("xi needs a partite family")
    return sum(1 for b in M.blocks if b in F)


def xi_values(F: Family, trials: int | None = None, seed: int = 0, exact: bool | None = None):
    """Vector of xi over sampled matchings, or over all matchings in exact mode."""
    params = F.params
    if exact is None:
        exact = matching_count(params) <= EXACT_LIMIT
    ind = F.indicator
    if exact:
        codes = _all_codes(params)
    else:
        if trials is None or trials < 1:
            raise ParameterError("trials must be at least 1")
        codes = _sampled_codes(params, trials, make_rng(seed))
    return ind[codes].sum(axis=1), exact


@dataclass(frozen=True)
class XiStatistics:
    trials: int
    exact: bool
    seed: int | None
    mean: Fraction | float
    histogram: dict  # xi value -> count
    p_neq: Fraction | float
    p_gt: Fraction | float
    alpha: Fraction = Fraction(0)
    tail_counts: dict = field(default_factory=dict)  # t -> #{xi >= t}


def _freq(count: int, total: int, exact: bool):
    return Fraction(count, total) if exact else count / total


def estimate_xi(F: Family, s: int, trials: int = 10_000, seed: int = 0, exact: bool | None = None) -> XiStatistics:
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    vals, exact = xi_values(F, trials, seed, exact)
    total = len(vals)
    hist = Counter(int(v) for v in vals)
    neq = int(np.count_nonzero(vals != s - 1))
    gt = int(np.count_nonzero(vals > s - 1))
    mean = Fraction(int(vals.sum()), total) if exact else float(vals.mean())
    tails = {t: sum(c for v, c in hist.items() if v >= t) for t in range(F.params.n + 1)}
    return XiStatistics(
        trials=total,
        exact=exact,
        seed=None if exact else seed,
        mean=mean,
        histogram=dict(sorted(hist.items())),
        p_neq=_freq(neq, total, exact),
        p_gt=_freq(gt, total, exact),
        alpha=Fraction(len(F), F.params.cube_size),
        tail_counts=tails,
    )


# ---------------------------------------------------------- concentration


def conc_bound(alpha: float, n: int, lam: float, delta: int = 1) -> float:
    """``2 exp(-lam^2 / (alpha n / 2 + 2 lam))``; independent of ``delta``."""
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    if not 0 <= alpha <= 1:
        raise ParameterError("alpha must lie in [0, 1]")
    if delta not in (-1, 1):
        raise ParameterError("delta must be -1 or 1")
    return 2.0 * math.exp(-(lam * lam) / (alpha * n / 2 + 2 * lam))


@dataclass(frozen=True)
class TailRow:
    lam: float
    delta: int
    count: int
    frequency: float
    bound: float
    sigma: float
    flagged: bool


@dataclass(frozen=True)
class ConcentrationReport:
    n: int
    k: int
    alpha: float
    trials: int
    seed: int
    rows: tuple

    @property
    def flags(self) -> int:
        return sum(r.flagged for r in self.rows)

    @property
    def ok(self) -> bool:
        return self.flags == 0


def check_concentration(F: Family, trials: int = 10_000, lambdas=(1, 2, 4, 8), seed: int = 0) -> ConcentrationReport:
    """Empirical two-sided tails of ``eta - alpha n`` against the bound.

    A row is flagged when its frequency exceeds the bound by more than
    three binomial standard errors (computed at the clipped bound).
    """
    params = F.params
    vals, _ = xi_values(F, trials, seed, exact=False)
    alpha = len(F) / params.cube_size
    dev = vals - alpha * params.n
    rows = []
    for lam in lambdas:
        for delta in (-1, 1):
            count = int(np.count_nonzero(delta * dev >= 2 * lam))
            freq = count / trials
            bound = conc_bound(alpha, params.n, lam, delta)
            q = min(bound, 1.0)
            sigma = math.sqrt(q * (1 - q) / trials)
            rows.append(TailRow(float(lam), delta, count, freq, bound, sigma, freq > bound + 3 * sigma))
    return ConcentrationReport(params.n, params.k, alpha, trials, seed, tuple(rows))


@dataclass(frozen=True)
class TailRatioReport:
    p_gt: Fraction
    p_neq: Fraction
    n: int
    holds: bool


def tail_ratio_check(F: Family, s: int) -> TailRatioReport:
    """Exact check of ``P[xi > s-1] >= P[xi != s-1] / n``."""
    params = F.params
    if len(F) < (s - 1) * params.n ** (params.k - 1):
        raise ParameterError("tail ratio check needs |F| >= (s-1) n^(k-1)")
    if matching_count(params) > EXACT_LIMIT:
        raise ParameterError("exact enumeration infeasible for this (n, k)")
    st = estimate_xi(F, s, exact=True)
    return TailRatioReport(st.p_gt, st.p_neq, params.n, st.p_gt >= st.p_neq / params.n)


# ------------------------------------------------------- anticoncentration


def pab_family(F: Family, a: int, b: int, coord: int = 0) -> Family:
    """``{x in [n]^(k-1) : (a, x) in F, (b, x) not in F}`` with ``coord`` as the split."""
    params = F.params
    if a == b:
        raise ParameterError("P_{a,b} needs a != b")
    if params.k < 2:
        raise ParameterError("P_{a,b} needs k >= 2")
    if not (0 <= coord < params.k and 0 <= a < params.n and 0 <= b < params.n):
        raise ParameterError("index out of range")
    sub = InstanceParams(params.n, params.k - 1, params.s)
    out = []
    for rest in itertools.product(range(params.n), repeat=params.k - 1):
        xa = rest[:coord] + (a,) + rest[coord:]
        xb = rest[:coord] + (b,) + rest[coord:]
        if partite_block(xa) in F and partite_block(xb) not in F:
            out.append(partite_block(rest))
    return Family(sub, out, check=False)


BOUNDED = "BOUNDED"
FAT_THIN = "FAT-THIN"
VIOLATION = "THEOREM-REGIME-VIOLATION"


@dataclass(frozen=True)
class CoordinateClass:
    coord: int
    case: str
    fat: tuple
    thin: tuple
    counts: tuple


@dataclass(frozen=True)
class HyperplaneClassification:
    p: Fraction
    s: int
    coordinates: tuple
    fat_threshold: Fraction
    thin_threshold: Fraction
    bounded_threshold: Fraction
    hypothesis_part1: bool  # n >= 4 and p < 1/8
    hypothesis_part23: bool  # n >= 8, s >= 3, p <= 1/(4n(s-1))
    below_one_fifth: bool

    @property
    def fat_hyperplanes(self) -> tuple:
        return tuple((c.coord, a) for c in self.coordinates for a in c.fat)

    @property
    def parallel(self) -> bool:
        return len({c for c, _ in self.fat_hyperplanes}) <= 1

    @property
    def fat_count(self) -> int:
        return len(self.fat_hyperplanes)

    @property
    def violations(self) -> tuple:
        return tuple(c.coord for c in self.coordinates if c.case == VIOLATION)


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def classify_hyperplanes(F: Family, p, s: int) -> HyperplaneClassification:
    """Fat/thin structure of the hyperplane counts for a given ``p``.

    A coordinate is FAT-THIN when every count is fat or thin and at least
    one is fat; otherwise BOUNDED when every count is within the bounded
    threshold; otherwise a regime violation is recorded.
    """
    params = F.params
    n, k = params.n, params.k
    p = _exact(p)
    if not 0 <= p <= 1:
        raise ParameterError("p must lie in [0, 1]")
    unit = Fraction(n ** (k - 1))
    fat_thr = (1 - 2 * p) * unit
    thin_thr = 2 * p * unit
    bounded_thr = thin_thr + (s - 1) * Fraction(n) ** (k - 2)
    coords = []
    for j in range(k):
        counts = tuple(int(c) for c in F.counts[j])
        fat = tuple(a for a, c in enumerate(counts) if c >= fat_thr)
        thin = tuple(a for a, c in enumerate(counts) if c <= thin_thr and a not in fat)
        if fat and len(fat) + len(thin) == n:
            case = FAT_THIN
        elif all(c <= bounded_thr for c in counts):
            case, fat, thin = BOUNDED, (), ()
        else:
            case, fat, thin = VIOLATION, (), ()
        coords.append(CoordinateClass(j, case, fat, thin, counts))
    return HyperplaneClassification(
        p=p,
        s=s,
        coordinates=tuple(coords),
        fat_threshold=fat_thr,
        thin_threshold=thin_thr,
        bounded_threshold=bounded_thr,
        hypothesis_part1=n >= 4 and p < Fraction(1, 8),
        hypothesis_part23=n >= 8 and s >= 3 and p <= Fraction(1, 4 * n * (s - 1)),
        below_one_fifth=p <= Fraction(1, 5),
    )


def disjoint_pair_count(P: Family) -> int:
    """Pairs ``(x, y)`` with ``x in P``, ``y`` outside ``P``, differing in every coordinate."""
    n, d = P.params.n, P.params.k
    if not P.partite:
        raise ParameterError("disjoint_pair_count needs a partite family")
    m = len(P)
    if m == 0:
        return 0
    vals = np.array([[e.value for e in b] for b in P.blocks], dtype=np.int64)
    inside = (vals[:, None, :] != vals[None, :, :]).all(axis=2).sum()
    return m * (n - 1) ** d - int(inside)


def mixing_bound(n: int, k: int, m: int) -> Fraction:
    """``((n-1)^(k-1) - (n-1)^(k-3)) m (n^(k-1) - m) / n^(k-1)``."""
    if k < 3:
        raise ParameterError("mixing bound needs k >= 3")
    N = n ** (k - 1)
    return Fraction(((n - 1) ** (k - 1) - (n - 1) ** (k - 3)) * m * (N - m), N)


# ------------------------------------------------------------ spread lemma

VACUOUS = "VACUOUS"
PASS = "PASS"
FAIL = "FAIL"


@dataclass(frozen=True)
class SpreadLemmaReport:
    status: str
    empirical: float
    bound: float
    margin: float
    sigma: float
    trials: int
    seed: int
    keep_probability: float


def spread_lemma_check(
    F: Family, r: float, beta: float, delta: float, trials: int = 10_000, seed: int = 0
) -> SpreadLemmaReport:
    """Empirical ``P[some block ⊆ W]`` for a ``beta*delta``-random ``W``."""
    from .spread import is_r_spread

    q = beta * delta
    if not 0 < q <= 1:
        raise ParameterError("beta * delta must lie in (0, 1]")
    if r * delta <= 2:
        raise ParameterError("need r * delta > 2")
    if len(F) == 0:
        raise ParameterError("family must be nonempty")
    ok, violator = is_r_spread(F, r)
    if not ok:
        raise ParameterError(f"family is not {r}-spread (violator {violator})")
    n, k = F.params.n, F.params.k
    uniformity = max(len(b) for b in F.blocks)
    bound = 1 - (2 / math.log2(r * delta)) ** beta * uniformity
    rng = make_rng(seed)
    W = rng.random((trials, k, n)) < q
    hit = np.zeros(trials, dtype=bool)
    for b in F.blocks:
        inside = np.ones(trials, dtype=bool)
        for part, value in b:
            inside &= W[:, part, value]
        hit |= inside
        if hit.all():
            break
    emp = float(hit.mean())
    sigma = math.sqrt(max(bound, 0) * (1 - min(max(bound, 0), 1)) / trials)
    if bound <= 0:
        status = VACUOUS
    elif emp >= bound - 3 * sigma:
        status = PASS
    else:
        status = FAIL
    return SpreadLemmaReport(status, emp, bound, emp - bound, sigma, trials, seed, q)
