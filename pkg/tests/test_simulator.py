from fractions import Fraction

import numpy as np
import pytest

from carrykit.carries import carry_count_pairs
from carrykit.ring import balanced_digits, make_digit_set, standard_digits
from carrykit.simulator import (
    BLOCK_TRIALS,
    block_draws,
    exact_expected_carries,
    partial_sum_uniformity_check,
    simulate_chain,
)


def test_exact_expected_examples():
    assert exact_expected_carries(balanced_digits(3), 1) == 0
    assert exact_expected_carries(balanced_digits(3), 10) == 2
    assert exact_expected_carries(standard_digits(10), 3) == Fraction(9, 10)


def test_single_summand_never_carries():
    s = simulate_chain(make_digit_set({0, 4, 8}, 3), 1, 500, seed=3)
    assert s.total_carries == 0 and s.per_step_carries == ()


def test_pair_rate_converges():
    s = simulate_chain(balanced_digits(3), 2, 200_000, seed=11)
    q = 2 / 9
    se = (q * (1 - q) / s.trials) ** 0.5
    assert abs(s.per_step_rates[0] - q) < 4 * se


def test_balanced5_chain_mean():
    s = simulate_chain(balanced_digits(5), 10, 200_000, seed=1)
    assert s.exact_expected == Fraction(54, 25)
    assert abs(s.z_score) < 4


def test_step_carry_matches_scalar_fold():
    # compare the vectorised fold with a direct scalar recomputation of each trial
    A = make_digit_set({0, 7, 14, 3, 22, 29}, 6)
    m = 36
    trials, n, seed = 300, 6, 9
    g = block_draws(seed, 0, n, m)[:trials]
    expected = [0] * (n - 1)
    for row in g.tolist():
        digit = A.rep(row[0])
        for j, x in enumerate(row[1:]):
            s = (digit + A.rep(x)) % m
            expected[j] += s not in A
            digit = A.rep(s)
    assert list(simulate_chain(A, n, trials, seed).per_step_carries) == expected


def test_reproducible_and_worker_independent():
    A = balanced_digits(5)
    a = simulate_chain(A, 7, 3 * BLOCK_TRIALS + 17, seed=42)
    b = simulate_chain(A, 7, 3 * BLOCK_TRIALS + 17, seed=42)
    c = simulate_chain(A, 7, 3 * BLOCK_TRIALS + 17, seed=42, workers=3)
    assert a == b == c
    assert a != simulate_chain(A, 7, 3 * BLOCK_TRIALS + 17, seed=43)


def test_trial_prefix_stable():
    # trial i's draws depend only on (seed, i), not on how many trials were requested
    A = standard_digits(4)
    small = simulate_chain(A, 2, 1000, seed=5)
    g = block_draws(5, 0, 2, 16)[:1000]
    direct = sum((A.rep(x) + A.rep(y)) % 16 not in A for x, y in g.tolist())
    assert small.total_carries == direct


def test_invalid_arguments():
    with pytest.raises(ValueError):
        simulate_chain(balanced_digits(3), 0, 10)
    with pytest.raises(ValueError):
        simulate_chain(balanced_digits(3), 2, 0)


def test_uniformity_balanced3():
    rep = partial_sum_uniformity_check(balanced_digits(3), 5, 1_000_000, seed=0)
    assert rep.counts.shape == (5, 9)
    assert (rep.counts.sum(axis=1) == 1_000_000).all()
    assert rep.max_abs_z < 4
    assert not rep.flagged() and not rep.failed
    assert rep.rate_spread() < 4


def test_uniformity_first_step_is_raw_draws():
    rep = partial_sum_uniformity_check(standard_digits(4), 3, 2000, seed=8)
    g = block_draws(8, 0, 3, 16)[:2000]
    assert rep.counts[0].tolist() == np.bincount(g[:, 0], minlength=16).tolist()


def test_per_step_rate_constant():
    A = make_digit_set({0, 4, 5}, 3)
    rep = partial_sum_uniformity_check(A, 8, 300_000, seed=2)
    assert rep.rate_spread() < 4
    q = carry_count_pairs(A).probability
    assert rep.stats.exact_expected == 7 * q
