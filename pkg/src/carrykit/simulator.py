"""Monte Carlo runs of left-to-right chain addition in Z_{b^2}.

Each trial draws ``n`` uniform residues, splits each into digit + high part,
and folds them in order.  Per step the two digits are added; if their sum
leaves the digit set, the correction ``t`` (a multiple of b) is a carry and is
pushed into the high part.

Randomness comes from numpy's Philox4x64 counter-based generator.  Trials are
grouped into fixed blocks of ``BLOCK_TRIALS``; block ``j`` uses key ``seed``
and a counter whose third word is ``j``.  The draws of a trial therefore
depend only on ``(seed, trial index)``, so results do not change with the
number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import partial

import numpy as np

from ._parallel import chunked, pmap
from .carries import carry_count_pairs, fraction_dict
from .ring import DigitSet

BLOCK_TRIALS = 1 << 14
RNG_ALGORITHM = f"numpy.random.Philox(key=seed, counter=[0, 0, block, 0]); block={BLOCK_TRIALS} trials; Generator.integers(0, b*b)"
FLAG_SIGMA = 4.0
FAIL_SIGMA = 6.0


def exact_expected_carries(A: DigitSet, n: int) -> Fraction:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return (n - 1) * carry_count_pairs(A).probability


def block_draws(seed: int, block: int, n: int, m: int) -> np.ndarray:
    bitgen = np.random.Philox(key=seed, counter=[0, 0, block, 0])
    return np.random.Generator(bitgen).integers(0, m, size=(BLOCK_TRIALS, n), dtype=np.int64)


@dataclass
class _Tally:
    trials: int
    total: int
    sum_sq: int
    per_step: np.ndarray  # carries at steps 2..n
    hist: np.ndarray | None  # running-sum histogram, shape (n, m)

    def merge(self, other: _Tally) -> _Tally:
        hist = None if self.hist is None else self.hist + other.hist
        return _Tally(
            self.trials + other.trials,
            self.total + other.total,
            self.sum_sq + other.sum_sq,
            self.per_step + other.per_step,
            hist,
        )


def _run_block(block: int, reps: tuple[int, ...], n: int, trials: int, seed: int, histogram: bool, validate: bool) -> _Tally:
    b = len(reps)
    m = b * b
    rep_arr = np.asarray(reps, dtype=np.int64)
    lo = block * BLOCK_TRIALS
    rows = min(BLOCK_TRIALS, trials - lo)
    g = block_draws(seed, block, n, m)[:rows]

    digit = rep_arr[g[:, 0] % b]
    high = (g[:, 0] - digit) % m
    running = g[:, 0].copy()
    carries = np.zeros(rows, dtype=np.int64)
    per_step = np.zeros(max(n - 1, 0), dtype=np.int64)
    hist = np.zeros((n, m), dtype=np.int64) if histogram else None
    if histogram:
        hist[0] = np.bincount(running, minlength=m)

    for j in range(1, n):
        x = rep_arr[g[:, j] % b]
        y = (g[:, j] - x) % m
        s = (digit + x) % m
        z = rep_arr[s % b]
        t = (s - z) % m
        carried = t != 0
        digit, high = z, (t + high + y) % m
        carries += carried
        per_step[j - 1] = int(carried.sum())
        running = (running + g[:, j]) % m
        if validate:
            assert np.all(high % b == 0)
            assert np.all((digit + high) % m == running)
        if histogram:
            hist[j] = np.bincount(running, minlength=m)

    return _Tally(rows, int(carries.sum()), int((carries * carries).sum()), per_step, hist)


def _run_blocks(blocks, **kw) -> _Tally:
    out = None
    for blk in blocks:
        t = _run_block(blk, **kw)
        out = t if out is None else out.merge(t)
    return out


def _simulate(A: DigitSet, n: int, trials: int, seed: int, workers: int, histogram: bool, validate: bool) -> _Tally:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    blocks = list(range(math.ceil(trials / BLOCK_TRIALS)))
    job = partial(_run_blocks, reps=A.reps, n=n, trials=trials, seed=seed, histogram=histogram, validate=validate)
    parts = pmap(job, chunked(blocks, max(1, workers)), workers)
    total = parts[0]
    for p in parts[1:]:
        total = total.merge(p)
    return total


@dataclass(frozen=True)
class ChainStats:
    digit_set: DigitSet
    n: int
    trials: int
    seed: int
    total_carries: int
    sum_sq: int
    per_step_carries: tuple[int, ...]

    @property
    def base(self):
        return self.digit_set.base

    @property
    def empirical_mean(self) -> Fraction:
        return Fraction(self.total_carries, self.trials)

    @property
    def per_step_rates(self) -> list[float]:
        return [c / self.trials for c in self.per_step_carries]

    @property
    def exact_expected(self) -> Fraction:
        return exact_expected_carries(self.digit_set, self.n)

    @property
    def standard_error(self) -> float:
        """Standard error of the mean number of carries per trial."""
        if self.trials < 2:
            return math.inf
        mean = self.total_carries / self.trials
        var = (self.sum_sq - self.trials * mean * mean) / (self.trials - 1)
        return math.sqrt(max(var, 0.0) / self.trials)

    @property
    def z_score(self) -> float:
        diff = float(self.empirical_mean - self.exact_expected)
        if diff == 0:
            return 0.0
        return diff / self.standard_error if self.standard_error > 0 else math.inf

    def to_dict(self) -> dict:
        return {
            "digit_set": self.digit_set.to_dict(),
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "rng": RNG_ALGORITHM,
            "total_carries": self.total_carries,
            "empirical_mean": fraction_dict(self.empirical_mean),
            "exact_expected": fraction_dict(self.exact_expected),
            "standard_error": self.standard_error,
            "z_score": self.z_score,
            "per_step_carries": list(self.per_step_carries),
            "per_step_rates": self.per_step_rates,
        }

    def csv_rows(self) -> list[dict]:
        return [
            {"step": j + 2, "carries": c, "rate": c / self.trials}
            for j, c in enumerate(self.per_step_carries)
        ]


def simulate_chain(
    A: DigitSet, n: int, trials: int, seed: int = 0, workers: int = 1, validate: bool = True
) -> ChainStats:
    tally = _simulate(A, n, trials, seed, workers, histogram=False, validate=validate)
    return ChainStats(A, n, trials, seed, tally.total, tally.sum_sq, tuple(int(c) for c in tally.per_step))


@dataclass(frozen=True)
class UniformityReport:
    stats: ChainStats
    counts: np.ndarray  # shape (n, b*b): running-sum histogram after each step
    flag_sigma: float = FLAG_SIGMA
    fail_sigma: float = FAIL_SIGMA

    @property
    def sigma(self) -> float:
        m = self.stats.digit_set.modulus
        p = 1 / m
        return math.sqrt(p * (1 - p) / self.stats.trials)

    def deviations(self) -> np.ndarray:
        m = self.stats.digit_set.modulus
        return (self.counts / self.stats.trials - 1 / m) / self.sigma

    def flagged(self, threshold: float | None = None) -> list[tuple[int, int, float]]:
        """(step, residue, z) for every cell beyond ``threshold`` sigma; steps count from 1."""
        thr = self.flag_sigma if threshold is None else threshold
        z = self.deviations()
        return [(int(s) + 1, int(x), float(z[s, x])) for s, x in zip(*np.nonzero(np.abs(z) > thr))]

    @property
    def max_abs_z(self) -> float:
        return float(np.abs(self.deviations()).max())

    @property
    def failed(self) -> bool:
        return bool(self.flagged(self.fail_sigma))

    def rate_spread(self) -> float:
        """Largest per-step carry-rate deviation from the exact probability, in binomial sigmas."""
        q = float(carry_count_pairs(self.stats.digit_set).probability)
        if not self.stats.per_step_carries or q in (0.0, 1.0):
            return 0.0
        se = math.sqrt(q * (1 - q) / self.stats.trials)
        return max(abs(r - q) / se for r in self.stats.per_step_rates)

    def to_dict(self) -> dict:
        return {
            "chain": self.stats.to_dict(),
            "flag_sigma": self.flag_sigma,
            "fail_sigma": self.fail_sigma,
            "max_abs_z": self.max_abs_z,
            "flagged": [{"step": s, "residue": x, "z": z} for s, x, z in self.flagged()],
            "step_rate_max_z": self.rate_spread(),
            "counts": self.counts.tolist(),
            "pass": not self.failed,
        }

    def csv_rows(self) -> list[dict]:
        return [
            {"step": s + 1, "residue": x, "count": int(self.counts[s, x])}
            for s in range(self.counts.shape[0])
            for x in range(self.counts.shape[1])
        ]


def partial_sum_uniformity_check(
    A: DigitSet, n: int, trials: int, seed: int = 0, workers: int = 1, flag_sigma: float = FLAG_SIGMA
) -> UniformityReport:
    tally = _simulate(A, n, trials, seed, workers, histogram=True, validate=True)
    stats = ChainStats(A, n, trials, seed, tally.total, tally.sum_sq, tuple(int(c) for c in tally.per_step))
    return UniformityReport(stats, tally.hist, flag_sigma=flag_sigma)
