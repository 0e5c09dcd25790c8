"""Brute-force reference computations, deliberately naive and independent of carrykit internals."""

import itertools
from fractions import Fraction


def tuple_sum_counts(elements, k, m):
    counts = {}
    for tup in itertools.product(elements, repeat=k):
        x = sum(tup) % m
        counts[x] = counts.get(x, 0) + 1
    return counts


def carrying_tuples(elements, k, m, result=None):
    result = set(elements if result is None else result)
    return sum(1 for tup in itertools.product(elements, repeat=k) if sum(tup) % m not in result)


def mixed_carrying_pairs(A, B, C, m):
    C = set(C)
    return sum(1 for a in A for b in B if (a + b) % m not in C)


def integer_tail(p, k):
    h = (p - 1) // 2
    digits = range(-h, h + 1)
    hits = sum(1 for tup in itertools.product(digits, repeat=k) if abs(sum(tup)) > h)
    return Fraction(hits, p**k)


def all_digit_sets(b):
    for lifts in itertools.product(range(b), repeat=b):
        yield [i + b * t for i, t in enumerate(lifts)]


def rep_counts(sets, m):
    counts = [0] * m
    for tup in itertools.product(*sets):
        counts[sum(tup) % m] += 1
    return counts
