"""Exact carry counts for two, mixed and k-fold digit addition.

All counts are Python integers and all probabilities are
:class:`fractions.Fraction`, so nothing here can overflow or round.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import BadBase, BaseMismatch, NotOdd, NotPrime
from .ring import Base, DigitSet, _as_base, balanced_digits


def fraction_dict(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator}


@dataclass(frozen=True)
class CarryStats:
    base: Base
    k: int
    carry_tuples: int
    total_tuples: int

    @property
    def probability(self) -> Fraction:
        return Fraction(self.carry_tuples, self.total_tuples)

    def to_dict(self) -> dict:
        return {
            "base": self.base.b,
            "k": self.k,
            "carry_tuples": self.carry_tuples,
            "total_tuples": self.total_tuples,
            "probability": fraction_dict(self.probability),
        }


@dataclass(frozen=True)
class KSumDistribution:
    base: Base
    k: int
    counts: tuple[int, ...]  # indexed by residue mod b**2

    def __getitem__(self, x: int) -> int:
        return self.counts[x % len(self.counts)]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def support(self) -> dict[int, int]:
        return {x: c for x, c in enumerate(self.counts) if c}

    def to_dict(self) -> dict:
        return {"base": self.base.b, "k": self.k, "counts": {str(x): c for x, c in self.support().items()}}


def _same_base(*sets: DigitSet) -> Base:
    base = sets[0].base
    for s in sets[1:]:
        if s.base != base:
            raise BaseMismatch(f"digit sets have bases {base.b} and {s.base.b}")
    return base


def carry_count_pairs(A: DigitSet) -> CarryStats:
    m = A.modulus
    carries = sum(1 for a in A.reps for c in A.reps if (a + c) % m not in A)
    return CarryStats(A.base, 2, carries, A.b * A.b)


def mixed_carry_count(A: DigitSet, B: DigitSet, C: DigitSet) -> CarryStats:
    """Count ordered ``(a, b)`` in ``A x B`` whose sum lies outside ``C``."""
    base = _same_base(A, B, C)
    m = base.modulus
    carries = sum(1 for a in A.reps for c in B.reps if (a + c) % m not in C)
    return CarryStats(base, 2, carries, base.b * base.b)


def cyclic_convolve(counts: Sequence[int], support: Sequence[int], m: int) -> list[int]:
    """Convolve a count vector over Z_m with the indicator of ``support``."""
    out = [0] * m
    for x, c in enumerate(counts):
        if c:
            for a in support:
                out[(x + a) % m] += c
    return out


def sumset_counts(sets: Sequence[Sequence[int]], m: int) -> list[int]:
    """n(x) for ordered sums of one element from each set, over Z_m."""
    counts = [0] * m
    for a in sets[0]:
        counts[a % m] += 1
    for s in sets[1:]:
        counts = cyclic_convolve(counts, [a % m for a in s], m)
    return counts


def ksum_distribution(A: DigitSet, k: int) -> KSumDistribution:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    counts = sumset_counts([A.reps] * k, A.modulus)
    return KSumDistribution(A.base, k, tuple(counts))


def ksum_carry_count(A: DigitSet, k: int) -> CarryStats:
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    dist = ksum_distribution(A, k)
    carries = sum(c for x, c in enumerate(dist.counts) if x not in A)
    return CarryStats(A.base, k, carries, A.b**k)


def integer_sum_counts(p: int, k: int) -> dict[int, int]:
    """Counts of integer sums of ``k`` uniform draws from ``[-(p-1)/2, (p-1)/2]``."""
    h = (p - 1) // 2
    dist = {0: 1}
    for _ in range(k):
        nxt: dict[int, int] = {}
        for s, c in dist.items():
            for d in range(-h, h + 1):
                nxt[s + d] = nxt.get(s + d, 0) + c
        dist = nxt
    return dist


def balanced_integer_tail(p: int, k: int) -> Fraction:
    """P(|X_1 + ... + X_k| > (p-1)/2) for X_i uniform on the balanced digits, as integers."""
    if p < 3 or p % 2 == 0:
        raise BadBase(f"need an odd base >= 3, got {p}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    h = (p - 1) // 2
    tail = sum(c for s, c in integer_sum_counts(p, k).items() if abs(s) > h)
    return Fraction(tail, p**k)


def no_wrap(p: int, k: int) -> bool:
    """True when no k-fold balanced sum can wrap around mod p**2 back into the digit set."""
    h = (p - 1) // 2
    return k * h < p * p - h


def closed_form_standard(b) -> Fraction:
    b = _as_base(b).b
    return Fraction(b - 1, 2 * b)


def closed_form_balanced(b) -> Fraction:
    base = _as_base(b)
    if not base.is_odd:
        raise BadBase(f"balanced digits need an odd base, got {base.b}")
    b = base.b
    return Fraction(b * b - 1, 4 * b * b)


def pair_lower_bound(p: int) -> int:
    """Minimum number of carrying ordered pairs for any digit set of odd prime base ``p``."""
    base = _as_base(p)
    if not base.is_odd:
        raise NotOdd(f"{p} is even")
    if not base.is_prime:
        raise NotPrime(f"{p} is not prime")
    return (p * p - 1) // 4


def balanced_ksum_carry_count(p: int, k: int) -> CarryStats:
    return ksum_carry_count(balanced_digits(p), k)
