"""Arithmetic in F_p(alpha), alpha^2 = a, and coefficient certificates for k = 2.

For ``n = p`` prime, a nonzero coefficient of ``x_1^f_1 ... x_s^f_s`` in
``prod_{i<j} (x_j - x_i)^2`` modulo ``p`` certifies that
``p f_1, ..., p f_s`` is a satisfying sequence on ``[p]^2``.  The cell
``(i, j)`` is embedded as ``i + alpha j`` so that two cells share a row or
a column exactly when the squared difference of their images lies in
``Z_p``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import ParameterError

MAX_S = 11
NAIVE_MAX_S = 5

LIFT_NOTE = (
    "coefficient of x^f in prod (x_j - x_i)^2 equals the coefficient of x^(p f) in "
    "prod (x_j^p - x_i^p)^2, the top-degree part of prod_{i<j} prod_{q in Z_p} ((x_j - x_i)^2 - q) "
    "over F_p(alpha); Combinatorial Nullstellensatz then yields a nonvanishing point on "
    "phi(F_1) x ... x phi(F_s), i.e. a rainbow matching"
)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def find_non_residue(p: int) -> int:
    """Smallest ``a >= 2`` with ``a^((p-1)/2) = -1 (mod p)``."""
    if p == 2 or not is_prime(p):
        raise ParameterError(f"p must be an odd prime, got {p}")
    for a in range(2, p):
        if pow(a, (p - 1) // 2, p) == p - 1:
            return a
    raise AssertionError("no quadratic non-residue found")


@dataclass(frozen=True)
class QuadExtField:
    p: int
    a: int

    def __post_init__(self):
        if self.p == 2 or not is_prime(self.p):
            raise ParameterError(f"p must be an odd prime, got {self.p}")
        if pow(self.a % self.p, (self.p - 1) // 2, self.p) != self.p - 1:
            raise ParameterError(f"{self.a} is a quadratic residue mod {self.p}")

    @classmethod
    def for_prime(cls, p: int) -> "QuadExtField":
        return cls(p, find_non_residue(p))

    def __call__(self, u: int, v: int = 0) -> "Fp2Element":
        return Fp2Element(u % self.p, v % self.p, self)

    @property
    def zero(self) -> "Fp2Element":
        return self(0, 0)

    @property
    def one(self) -> "Fp2Element":
        return self(1, 0)

    @property
    def alpha(self) -> "Fp2Element":
        return self(0, 1)

    def elements(self):
        for u in range(self.p):
            for v in range(self.p):
                yield self(u, v)


@dataclass(frozen=True)
class Fp2Element:
    """``u + v alpha`` with ``0 <= u, v < p``."""

    u: int
    v: int
    field: QuadExtField = field(repr=False)

    def _other(self, other) -> "Fp2Element":
        if isinstance(other, int):
            return self.field(other)
        if not isinstance(other, Fp2Element):
            return NotImplemented
        if other.field != self.field:
            raise ParameterError("elements belong to different fields")
        return other

    def __add__(self, other):
        other = self._other(other)
        return self.field(self.u + other.u, self.v + other.v)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._other(other)
        return self.field(self.u - other.u, self.v - other.v)

    def __rsub__(self, other):
        return self._other(other) - self

    def __neg__(self):
        return self.field(-self.u, -self.v)

    def __mul__(self, other):
        other = self._other(other)
        a = self.field.a
        return self.field(self.u * other.u + a * self.v * other.v, self.u * other.v + self.v * other.u)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ParameterError("negative exponents are not supported")
        acc, base = self.field.one, self
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc

    def __bool__(self):
        return bool(self.u or self.v)

    @property
    def in_base_field(self) -> bool:
        return self.v == 0


def add(x: Fp2Element, y: Fp2Element) -> Fp2Element:
    return x + y


def sub(x: Fp2Element, y: Fp2Element) -> Fp2Element:
    return x - y


def mul(x: Fp2Element, y: Fp2Element) -> Fp2Element:
    return x * y


def neg(x: Fp2Element) -> Fp2Element:
    return -x


def phi(F: QuadExtField, cell) -> Fp2Element:
    """``(i, j) -> i + alpha j`` for a 1-based cell of ``[p]^2``."""
    i, j = cell
    if not (1 <= i <= F.p and 1 <= j <= F.p):
        raise ParameterError(f"cell {cell} outside [{F.p}]^2")
    return F(i, j)


@dataclass(frozen=True)
class ClaimZpReport:
    p: int
    a: int
    pairs: int
    failures: tuple

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_claim_zp(F: QuadExtField) -> ClaimZpReport:
    """Squared differences land in Z_p exactly for cells sharing a row or column."""
    cells = [(i, j) for i in range(1, F.p + 1) for j in range(1, F.p + 1)]
    images = [phi(F, c) for c in cells]
    failures = []
    for (c1, x), (c2, y) in itertools.product(zip(cells, images), repeat=2):
        d = x - y
        real = (d * d).in_base_field
        shared = c1[0] == c2[0] or c1[1] == c2[1]
        if real != shared:
            failures.append((c1, c2))
    return ClaimZpReport(F.p, F.a, len(cells) ** 2, tuple(failures))


# ------------------------------------------------------------ coefficients


def _check_exponents(s: int, f) -> tuple[int, ...]:
    f = tuple(int(x) for x in f)
    if s < 1 or len(f) != s:
        raise ParameterError(f"exponent vector must have s={s} entries")
    if sum(f) != s * (s - 1):
        raise ParameterError(
            f"exponents sum to {sum(f)}; prod (x_j - x_i)^2 is homogeneous of degree "
            f"s(s-1)={s * (s - 1)}, so every other monomial has coefficient 0"
        )
    if any(x < 0 or x > 2 * (s - 1) for x in f):
        raise ParameterError(f"exponents must lie in [0, {2 * (s - 1)}]")
    return f


def vandermonde_sq_integer(f) -> int:
    """Exact integer coefficient of ``x^f`` in the squared Vandermonde product.

    Expanding both Vandermonde determinants, the coefficient is the sum of
    ``sgn(sigma) sgn(tau)`` over permutation pairs with
    ``sigma(i) + tau(i) = f_i + 2``.  Rows are assigned one at a time and
    the partial sums are memoized on the sets of used values; the sign of
    each assignment is the parity of earlier values exceeding it.
    """
    f = tuple(f)
    s = len(f)

    @lru_cache(maxsize=None)
    def go(used_sigma: int, used_tau: int) -> int:
        row = bin(used_sigma).count("1")
        if row == s:
            return 1
        total = 0
        for c in range(1, s + 1):
            if used_sigma >> c & 1:
                continue
            d = f[row] + 2 - c
            if not 1 <= d <= s or used_tau >> d & 1:
                continue
            inv = bin(used_sigma >> (c + 1)).count("1") + bin(used_tau >> (d + 1)).count("1")
            sub = go(used_sigma | 1 << c, used_tau | 1 << d)
            total += -sub if inv & 1 else sub
        return total

    return go(0, 0)


def vandermonde_sq_coefficient(s: int, f, p: int) -> int:
    if s > MAX_S:
        raise ParameterError(f"s={s} exceeds the supported maximum {MAX_S}")
    f = _check_exponents(s, f)
    return vandermonde_sq_integer(f) % p


def naive_coefficient_oracle(s: int, f, p: int) -> int:
    """Dense expansion of ``prod (x_j - x_i)^2`` over Z_p."""
    if s > NAIVE_MAX_S:
        raise ParameterError(f"naive expansion limited to s <= {NAIVE_MAX_S}")
    f = _check_exponents(s, f)
    poly = {(0,) * s: 1}
    for i, j in itertools.combinations(range(s), 2):
        for _ in range(2):
            nxt: dict = {}
            for mono, c in poly.items():
                up = list(mono)
                up[j] += 1
                down = list(mono)
                down[i] += 1
                nxt[tuple(up)] = (nxt.get(tuple(up), 0) + c) % p
                nxt[tuple(down)] = (nxt.get(tuple(down), 0) - c) % p
            poly = {m: c for m, c in nxt.items() if c}
    return poly.get(f, 0) % p


@dataclass(frozen=True)
class CoefficientCertificate:
    s: int
    f: tuple
    p: int
    coefficient: int  # residue mod p
    integer_coefficient: int
    satisfying_sequence: tuple
    valid: bool
    note: str = LIFT_NOTE


def certify_sequence_k2(p: int, f) -> CoefficientCertificate:
    if p == 2 or not is_prime(p):
        raise ParameterError(f"p must be an odd prime, got {p}")
    f = tuple(int(x) for x in f)
    s = len(f)
    if s > MAX_S:
        raise ParameterError(f"s={s} exceeds the supported maximum {MAX_S}")
    f = _check_exponents(s, f)
    integer = vandermonde_sq_integer(f)
    coef = integer % p
    return CoefficientCertificate(s, f, p, coef, integer, tuple(p * x for x in f), coef != 0)


def exponent_vectors(s: int, nondecreasing: bool = True):
    """All ``f`` with ``sum f = s(s-1)`` and ``0 <= f_i <= 2(s-1)``."""
    top = 2 * (s - 1)
    if nondecreasing:
        for f in itertools.combinations_with_replacement(range(top + 1), s):
            if sum(f) == s * (s - 1):
                yield f
    else:
        for f in itertools.product(range(top + 1), repeat=s):
            if sum(f) == s * (s - 1):
                yield f


def catalog_certificates(s: int, p: int) -> list[CoefficientCertificate]:
    return sorted((certify_sequence_k2(p, f) for f in exponent_vectors(s)), key=lambda c: c.f)


def uniform_magnitude(s: int) -> int:
    """``|coefficient|`` of ``(s-1, ..., s-1)``; equals ``s!``."""
    return abs(vandermonde_sq_integer((s - 1,) * s))


