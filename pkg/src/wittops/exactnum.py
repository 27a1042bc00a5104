"""Exact integer and Z/p^e scalar arithmetic plus orbit-coefficient combinatorics.

Everything here is computed with arbitrary-precision integers; factorials and
multinomials are never reduced before their p-adic valuation is extracted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache


INF = math.inf


def p_valuation(x: int, p: int):
    """Largest v with p^v | x, or math.inf for x = 0."""
    if x == 0:
        return INF
    x = abs(x)
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@lru_cache(maxsize=None)
def factorial_valuation(n: int, p: int) -> int:
    """val_p(n!) by Legendre's formula."""
    v = 0
    q = p
    while q <= n:
        v += n // q
        q *= p
    return v


@dataclass(frozen=True)
class ModExp:
    """A residue in Z/p^e with its prime and exponent carried along."""

    value: int
    p: int
    e: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.modulus)

    @property
    def modulus(self) -> int:
        return self.p ** self.e

    def _check(self, other: "ModExp"):
        if (self.p, self.e) != (other.p, other.e):
            raise ValueError(f"modulus mismatch: p^e = {self.p}^{self.e} vs {other.p}^{other.e}")

    def __add__(self, other):
        self._check(other)
        return ModExp(self.value + other.value, self.p, self.e)

    def __sub__(self, other):
        self._check(other)
        return ModExp(self.value - other.value, self.p, self.e)

    def __mul__(self, other):
        self._check(other)
        return ModExp(self.value * other.value, self.p, self.e)

    def __int__(self):
        return self.value

    def valuation(self):
        """p-adic valuation of the residue; inf when the residue is 0."""
        return min(p_valuation(self.value, self.p), self.e) if self.value else INF

    def is_unit(self) -> bool:
        return self.value % self.p != 0

    def inverse(self) -> "ModExp":
        if not self.is_unit():
            raise ZeroDivisionError(f"{self.value} is not a unit mod {self.p}^{self.e}")
        return ModExp(pow(self.value, -1, self.modulus), self.p, self.e)


def binomial_mod(a: int, b: int, p: int, e: int) -> ModExp:
    """Exact big-integer binomial coefficient reduced mod p^e."""
    if b > a:
        raise ValueError(f"binomial_mod requires b <= a, got ({a}, {b})")
    return ModExp(math.comb(a, b), p, e)


def binomial_shift_congruence(l: int, r: int, j: int, p: int) -> bool:
    """True iff C(l*p^r, p^j) == C(l*p^(r-1), p^(j-1)) mod p^r, exactly."""
    if not (1 <= j <= r):
        raise ValueError("need 1 <= j <= r")
    lhs = math.comb(l * p**r, p**j)
    rhs = math.comb(l * p ** (r - 1), p ** (j - 1))
    return (lhs - rhs) % p**r == 0


def multinomial_reduction_congruence(l: int, r: int, counts, p: int) -> bool:
    """Compare the multinomial p^l*(p^(r-l))!/prod(c_i!) with its p-fold
    reduction p^l*(p^(r-l-1))!/prod((c_i/p)!) mod p^r, with exact integers."""
    counts = tuple(counts)
    if r <= l:
        raise ValueError("need r > l")
    if sum(counts) != p ** (r - l):
        raise ValueError("counts must sum to p^(r-l)")
    if any(c % p for c in counts):
        raise ValueError("every count must be divisible by p")
    lhs = p**l * _multinomial(p ** (r - l), counts)
    rhs = p**l * _multinomial(p ** (r - l - 1), tuple(c // p for c in counts))
    return (lhs - rhs) % p**r == 0


def _multinomial(n: int, counts) -> int:
    num = math.factorial(n)
    for c in counts:
        num //= math.factorial(c)
    return num


@dataclass(frozen=True)
class OrbitDatum:
    """One symmetric-group orbit of compositions, with its lift coefficients.

    values are the distinct entries j_1 > ... > j_m, counts their
    multiplicities c_i (summing to the number of parts), alpha the valuation
    of p^l * (parts)!/prod(c_i!), b the image of that coefficient / p^alpha
    in F_p, unit the same quantity as an exact integer, and reduced_counts
    the c'_i with c_i = c'_i * p^(r - alpha).
    """

    values: tuple
    counts: tuple
    alpha: int
    b: ModExp
    unit: int
    reduced_counts: tuple

    def orbit_size(self) -> int:
        return _multinomial(sum(self.counts), self.counts)


def _partitions_max_parts(j, max_parts, max_value=None):
    """Weakly decreasing tuples of positive ints summing to j with at most
    max_parts entries."""
    if max_value is None:
        max_value = j
    if j == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(j, max_value), 0, -1):
        for rest in _partitions_max_parts(j - first, max_parts - 1, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def orbit_enumerate(j: int, l: int, r: int, p: int):
    """All orbits of compositions of j into p^(r-l) nonnegative parts whose
    coefficient p^l*(p^(r-l))!/prod(c_i!) has valuation alpha <= r.

    Orbits are returned as OrbitDatum tuples in a deterministic order
    (partitions enumerated with largest first part first). Orbits with
    alpha > r contribute nothing to the canonical lift and are dropped.
    """
    if j <= 0:
        raise ValueError("need j > 0")
    if l > r:
        raise ValueError("need l <= r")
    parts = p ** (r - l)
    top_val = factorial_valuation(parts, p)
    out = []
    for partition in _partitions_max_parts(j, parts):
        values = []
        counts = []
        for v in partition:
            if values and values[-1] == v:
                counts[-1] += 1
            else:
                values.append(v)
                counts.append(1)
        zeros = parts - len(partition)
        if zeros:
            values.append(0)
            counts.append(zeros)
        alpha = l + top_val - sum(factorial_valuation(c, p) for c in counts)
        if alpha < l:
            raise AssertionError("orbit coefficient valuation below p-power floor")
        if alpha > r:
            continue
        coeff = p**l * _multinomial(parts, tuple(counts))
        unit = coeff // p**alpha
        q = p ** (r - alpha)
        if any(c % q for c in counts):
            raise AssertionError("counts not divisible by p^(r-alpha)")
        out.append(
            OrbitDatum(
                values=tuple(values),
                counts=tuple(counts),
                alpha=alpha,
                b=ModExp(unit, p, 1),
                unit=unit,
                reduced_counts=tuple(c // q for c in counts),
            )
        )
    return tuple(out)
