import json

import pytest
from conftest import digit_sets
from hypothesis import given

from carrykit.errors import BadBase, DuplicateClass, NotADigit, WrongSize
from carrykit.ring import (
    Base,
    add_digits,
    balanced_digits,
    decompose,
    digit_set_from_json,
    is_prime,
    make_digit_set,
    standard_digits,
)


def test_base_properties():
    assert Base(7).is_prime and Base(7).is_odd
    assert Base(2).is_prime and not Base(2).is_odd
    assert not Base(9).is_prime
    assert Base(10).modulus == 100
    with pytest.raises(BadBase):
        Base(1)


def test_is_prime_against_sieve():
    limit = 2000
    sieve = [True] * limit
    sieve[0] = sieve[1] = False
    for i in range(2, limit):
        if sieve[i]:
            for j in range(i * i, limit, i):
                sieve[j] = False
    assert [n for n in range(limit) if is_prime(n)] == [n for n in range(limit) if sieve[n]]


@pytest.mark.parametrize(
    "elements, b, reps",
    [({0, 1, 8}, 3, (0, 1, 8)), ({-1, 0, 1}, 3, (0, 1, 8)), ({0, 1, 14, 15}, 4, (0, 1, 14, 15))],
)
def test_make_digit_set(elements, b, reps):
    assert make_digit_set(elements, b).reps == reps


def test_make_digit_set_errors():
    with pytest.raises(DuplicateClass):
        make_digit_set({0, 3, 1}, 3)
    with pytest.raises(WrongSize):
        make_digit_set({0, 1}, 3)
    with pytest.raises(BadBase):
        make_digit_set({0}, 1)


@pytest.mark.parametrize(
    "b, elements",
    [(3, {0, 1, 8}), (5, {0, 1, 2, 23, 24}), (7, {0, 1, 2, 3, 46, 47, 48})],
)
def test_balanced(b, elements):
    assert balanced_digits(b).elements == elements


@pytest.mark.parametrize("b", [2, 4, 10])
def test_balanced_rejects_even(b):
    with pytest.raises(BadBase):
        balanced_digits(b)


@pytest.mark.parametrize("b", [2, 3, 10])
def test_standard(b):
    assert standard_digits(b).reps == tuple(range(b))


def test_decompose_examples():
    assert decompose(0, balanced_digits(3)) == (0, 0)
    assert decompose(5, balanced_digits(3)) == (8, 6)
    assert decompose(7, standard_digits(3)) == (1, 6)


def test_add_digits_examples():
    A = balanced_digits(3)
    assert add_digits(0, 0, A) == (0, 0, False)
    assert add_digits(1, 1, A) == (8, 3, True)
    assert add_digits(1, 8, A) == (0, 0, False)
    with pytest.raises(NotADigit):
        add_digits(2, 1, A)


@pytest.mark.parametrize("b", range(2, 13))
def test_decomposition_is_unique_exhaustive(b):
    # every g has exactly one (x, y) with x in A, y a multiple of b, x + y = g
    A = balanced_digits(b) if b % 2 else standard_digits(b)
    m = b * b
    for g in range(m):
        pairs = [(x, y) for x in A.reps for y in range(0, m, b) if (x + y) % m == g]
        assert pairs == [tuple(decompose(g, A))]


@given(digit_sets())
def test_decompose_invariants(A):
    for g in range(A.modulus):
        d = decompose(g, A)
        assert d.digit in A and d.high % A.b == 0
        assert (d.digit + d.high) % A.modulus == g


@given(digit_sets())
def test_add_digits_invariants(A):
    m = A.modulus
    for x1 in A.reps:
        for x2 in A.reps:
            z, t, carried = add_digits(x1, x2, A)
            assert z in A and t % A.b == 0
            assert (z + t) % m == (x1 + x2) % m
            assert carried == (t != 0) == ((x1 + x2) % m not in A)


@given(digit_sets())
def test_rebuild_from_elements_is_identity(A):
    assert make_digit_set(A.elements, A.b) == A


@given(digit_sets())
def test_json_round_trip(A):
    assert digit_set_from_json(A.to_json()) == A
    assert digit_set_from_json(json.dumps({"base": A.b, "elements": A.centered()})) == A


def test_json_rejects_misindexed_reps():
    with pytest.raises(DuplicateClass):
        digit_set_from_json('{"base": 3, "reps": [1, 0, 8]}')
