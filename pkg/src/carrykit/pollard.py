"""Representation counts over Z_m and checkers for Pollard's sumset inequalities.

Inequality failures are returned as report data; a failing check means either a
bug here or a counterexample to a published theorem, and callers (the CLI in
particular) surface it with a dedicated exit code.  Precondition violations on
explicit inputs raise :class:`PreconditionViolated`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from ._parallel import chunked, pmap
from .carries import carry_count_pairs, ksum_carry_count, sumset_counts
from .errors import NotOdd, NotPrime, PreconditionViolated
from .ring import DigitSet, balanced_digits, is_prime


@dataclass(frozen=True)
class SumsetInstance:
    m: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"modulus must be >= 2, got {self.m}")
        if len(self.sets) < 2:
            raise ValueError("need at least two sets")
        for i, s in enumerate(self.sets):
            if not s:
                raise ValueError(f"set {i} is empty")
            if any(not 0 <= x < self.m for x in s) or len(set(s)) != len(s):
                raise ValueError(f"set {i} must hold distinct residues in [0, {self.m})")

    @classmethod
    def of(cls, m: int, *sets: Iterable[int]) -> SumsetInstance:
        """Build an instance, reducing elements mod ``m`` and dropping repeats."""
        return cls(m, tuple(tuple(sorted({int(x) % m for x in s})) for s in sets))

    @property
    def k(self) -> int:
        return len(self.sets)

    def to_dict(self) -> dict:
        return {"m": self.m, "sets": [list(s) for s in self.sets]}


def representation_counts(inst: SumsetInstance) -> list[int]:
    """n(x) for every x in Z_m: ordered tuples, one element per set, summing to x."""
    return sumset_counts(inst.sets, inst.m)


def sum_min(counts: Sequence[int], r: int) -> int:
    return sum(min(r, c) for c in counts)


def nr_values(counts: Sequence[int], R: int | None = None) -> list[int]:
    """[N_1, ..., N_R] where N_r = #{x : n(x) >= r}; R defaults to max n(x)."""
    if R is None:
        R = max(counts, default=0)
    return [sum(1 for c in counts if c >= r) for r in range(1, R + 1)]


def coprime_differences(S: Iterable[int], m: int) -> bool:
    s = sorted(set(x % m for x in S))
    return all(gcd(y - x, m) == 1 for i, x in enumerate(s) for y in s[i + 1 :])


@dataclass(frozen=True)
class PollardCheck:
    r: int
    lhs: int
    rhs: int

    @property
    def passed(self) -> bool:
        return self.lhs >= self.rhs

    def to_dict(self) -> dict:
        return {"r": self.r, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


@dataclass(frozen=True)
class PollardReport:
    instance: SumsetInstance
    rep_counts: tuple[int, ...]
    nr_values: tuple[int, ...]
    checks: tuple[PollardCheck, ...]
    precondition_ok: bool

    @property
    def violations(self) -> list[PollardCheck]:
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self) -> bool:
        return self.precondition_ok and not self.violations

    def to_dict(self) -> dict:
        return {
            "instance": self.instance.to_dict(),
            "rep_counts": {str(x): c for x, c in enumerate(self.rep_counts) if c},
            "nr_values": list(self.nr_values),
            "precondition_ok": self.precondition_ok,
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
        }


def check_pollard_pair(A: Iterable[int], B: Iterable[int], m: int) -> PollardReport:
    """Check N_1 + ... + N_r >= r * min(m, |A| + |B| - r) for every 1 <= r <= min(|A|, |B|).

    The hypothesis is that differences of distinct elements of ``B`` are
    coprime to ``m``; when it fails the report carries ``precondition_ok=False``
    and no verdicts.
    """
    inst = SumsetInstance.of(m, A, B)
    a, b = (len(s) for s in inst.sets)
    counts = representation_counts(inst)
    nr = nr_values(counts)
    ok = coprime_differences(inst.sets[1], m)
    checks = []
    if ok:
        checks = [PollardCheck(r, sum_min(counts, r), r * min(m, a + b - r)) for r in range(1, min(a, b) + 1)]
    return PollardReport(inst, tuple(counts), tuple(nr), tuple(checks), ok)


@dataclass(frozen=True)
class Theorem12Certificate:
    p: int
    digit_set: DigitSet
    r: int
    sum_min: int
    sum_min_bound: int
    in_a_contribution: int
    in_a_contribution_cap: int
    outside_pairs_lower: int
    outside_pairs_actual: int

    @property
    def steps(self) -> dict[str, bool]:
        return {
            "sum_min >= r(2p-r)": self.sum_min >= self.sum_min_bound,
            "in_A contribution <= rp": self.in_a_contribution <= self.in_a_contribution_cap,
            "actual >= sum_min - in_A": self.outside_pairs_actual >= self.sum_min - self.in_a_contribution,
            "r(p-r) == (p^2-1)/4": self.outside_pairs_lower == (self.p**2 - 1) // 4,
            "actual >= r(p-r)": self.outside_pairs_actual >= self.outside_pairs_lower,
        }

    @property
    def passed(self) -> bool:
        return all(self.steps.values())

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "digit_set": self.digit_set.to_dict(),
            "r": self.r,
            "sum_min": self.sum_min,
            "sum_min_bound": self.sum_min_bound,
            "inA_contribution": self.in_a_contribution,
            "inA_contribution_cap": self.in_a_contribution_cap,
            "outside_pairs_lower": self.outside_pairs_lower,
            "outside_pairs_actual": self.outside_pairs_actual,
            "steps": self.steps,
            "pass": self.passed,
        }


def _require_odd_prime(p: int) -> None:
    if not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if p == 2:
        raise NotOdd("p must be an odd prime, got 2")


def theorem12_certificate(p: int, A: DigitSet | None = None) -> Theorem12Certificate:
    """Replay the counting argument for the pair bound on one digit set.

    Pollard's inequality with m = p**2, B = A and r = (p-1)/2 gives
    sum_x min(r, n(x)) >= r(2p - r).  Elements of A absorb at most rp of
    that sum, so at least r(p - r) = (p**2 - 1)/4 ordered pairs land outside A.
    """
    _require_odd_prime(p)
    if A is None:
        A = balanced_digits(p)
    if A.b != p:
        raise PreconditionViolated(f"digit set has base {A.b}, expected {p}")
    r = (p - 1) // 2
    counts = representation_counts(SumsetInstance.of(p * p, A.reps, A.reps))
    return Theorem12Certificate(
        p=p,
        digit_set=A,
        r=r,
        sum_min=sum_min(counts, r),
        sum_min_bound=r * (2 * p - r),
        in_a_contribution=sum(min(r, counts[a]) for a in A.reps),
        in_a_contribution_cap=r * p,
        outside_pairs_lower=r * (p - r),
        outside_pairs_actual=carry_count_pairs(A).carry_tuples,
    )


@dataclass(frozen=True)
class IntervalComparison:
    instance: SumsetInstance
    intervals: tuple[tuple[int, int], ...]
    r: int
    lhs: int
    rhs: int

    @property
    def passed(self) -> bool:
        return self.lhs >= self.rhs

    def to_dict(self) -> dict:
        return {
            "instance": self.instance.to_dict(),
            "intervals": [list(iv) for iv in self.intervals],
            "r": self.r,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "pass": self.passed,
        }


def centered_intervals(inst: SumsetInstance) -> tuple[tuple[int, int], ...]:
    return tuple((-((len(s) - 1) // 2) % inst.m, len(s)) for s in inst.sets)


def check_interval_comparison(
    inst: SumsetInstance, intervals: Sequence[tuple[int, int]] | None = None, r: int = 1
) -> IntervalComparison:
    """Compare sum_x min(r, n(x)) for the given sets against same-size blocks of consecutive residues.

    Only sets 2..k need coprime differences; the first set is unrestricted.
    ``intervals`` holds ``(start, length)`` per set and defaults to blocks centred at 0.
    """
    if r < 1:
        raise PreconditionViolated(f"r must be >= 1, got {r}")
    for i, s in enumerate(inst.sets[1:], start=1):
        if not coprime_differences(s, inst.m):
            raise PreconditionViolated(f"set {i} has a difference sharing a factor with {inst.m}", index=i)
    if intervals is None:
        intervals = centered_intervals(inst)
    intervals = tuple((start % inst.m, length) for start, length in intervals)
    if len(intervals) != inst.k:
        raise PreconditionViolated(f"need {inst.k} intervals, got {len(intervals)}")
    for i, (s, (_, length)) in enumerate(zip(inst.sets, intervals)):
        if length != len(s):
            raise PreconditionViolated(f"interval {i} has length {length}, set has {len(s)}", index=i)
    blocks = SumsetInstance.of(inst.m, *(range(start, start + length) for start, length in intervals))
    lhs = sum_min(representation_counts(inst), r)
    rhs = sum_min(representation_counts(blocks), r)
    return IntervalComparison(inst, intervals, r, lhs, rhs)


@dataclass(frozen=True)
class Corollary42Check:
    digit_set: DigitSet
    k: int
    lhs_count: int
    balanced_count: int

    @property
    def passed(self) -> bool:
        return self.lhs_count >= self.balanced_count

    def to_dict(self) -> dict:
        return {
            "digit_set": self.digit_set.to_dict(),
            "k": self.k,
            "lhs_count": self.lhs_count,
            "balanced_count": self.balanced_count,
            "pass": self.passed,
        }


def corollary42_check(A: DigitSet, k: int, balanced_count: int | None = None) -> Corollary42Check:
    """Compare k-fold carry counts of ``A`` against the balanced digits.

    ``balanced_count`` may be passed in to avoid recomputing it when sweeping
    many digit sets of one base.
    """
    _require_odd_prime(A.b)
    if balanced_count is None:
        balanced_count = ksum_carry_count(balanced_digits(A.b), k).carry_tuples
    return Corollary42Check(A, k, ksum_carry_count(A, k).carry_tuples, balanced_count)


# -- randomized suites -------------------------------------------------------


def smallest_prime_factor(m: int) -> int:
    d = 2
    while d * d <= m:
        if m % d == 0:
            return d
        d += 1
    return m


def random_coprime_set(rng: np.random.Generator, m: int, size: int, tries: int = 64) -> tuple[int, ...]:
    """A ``size``-subset of Z_m whose differences are all coprime to m.

    Uniform subsets are rejection sampled; after ``tries`` rejections a
    greedy scan over a random permutation is used instead.  ``size`` must not
    exceed the smallest prime factor of ``m``.
    """
    for _ in range(tries):
        cand = rng.choice(m, size=size, replace=False)
        if coprime_differences(cand.tolist(), m):
            return tuple(sorted(int(x) for x in cand))
    while True:
        chosen: list[int] = []
        for x in rng.permutation(m).tolist():
            if all(gcd(x - y, m) == 1 for y in chosen):
                chosen.append(x)
                if len(chosen) == size:
                    return tuple(sorted(chosen))


def random_pair_instance(rng: np.random.Generator, m_max: int = 60) -> tuple[tuple[int, ...], tuple[int, ...], int]:
    m = int(rng.integers(2, m_max + 1))
    b_size = int(rng.integers(1, smallest_prime_factor(m) + 1))
    B = random_coprime_set(rng, m, b_size)
    if rng.random() < 0.25:
        return B, B, m
    a_size = int(rng.integers(1, m + 1))
    A = tuple(sorted(int(x) for x in rng.choice(m, size=a_size, replace=False)))
    return A, B, m


def random_partial_digit_set(rng: np.random.Generator, p: int, size: int) -> tuple[int, ...]:
    classes = rng.choice(p, size=size, replace=False)
    lifts = rng.integers(0, p, size=size)
    return tuple(sorted(int(c + p * t) for c, t in zip(classes, lifts)))


def random_interval_instance(
    rng: np.random.Generator, primes: Sequence[int] = (3, 5, 7), k_max: int = 4, r_max: int = 5
) -> tuple[SumsetInstance, tuple[tuple[int, int], ...], int]:
    p = int(rng.choice(primes))
    m = p * p
    k = int(rng.integers(2, k_max + 1))
    first = rng.choice(m, size=int(rng.integers(1, 2 * p + 1)), replace=False).tolist()
    rest = [random_partial_digit_set(rng, p, int(rng.integers(1, p + 1))) for _ in range(k - 1)]
    inst = SumsetInstance.of(m, first, *rest)
    intervals = tuple((int(rng.integers(0, m)), len(s)) for s in inst.sets)
    return inst, intervals, int(rng.integers(1, r_max + 1))


def instance_rng(seed: int, index: int) -> np.random.Generator:
    # per-instance streams make suites independent of how work is split
    return np.random.default_rng([seed, index])


@dataclass
class SuiteSummary:
    kind: str
    seed: int
    instances: int = 0
    checks: int = 0
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def merge(self, other: SuiteSummary) -> None:
        self.instances += other.instances
        self.checks += other.checks
        self.violations.extend(other.violations)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "instances": self.instances,
            "checks": self.checks,
            "violations": self.violations,
            "pass": self.passed,
        }


def _pair_chunk(indices: Sequence[int], seed: int, m_max: int) -> SuiteSummary:
    out = SuiteSummary("pollard_pair", seed)
    for i in indices:
        A, B, m = random_pair_instance(instance_rng(seed, i), m_max)
        rep = check_pollard_pair(A, B, m)
        if not rep.precondition_ok:
            raise AssertionError(f"generator produced a set violating the hypothesis: {B} mod {m}")
        out.instances += 1
        out.checks += len(rep.checks)
        for c in rep.violations:
            out.violations.append({"index": i, "instance": rep.instance.to_dict(), **c.to_dict()})
    return out


def _interval_chunk(indices: Sequence[int], seed: int) -> SuiteSummary:
    out = SuiteSummary("pollard_interval", seed)
    for i in indices:
        inst, intervals, r = random_interval_instance(instance_rng(seed, i))
        res = check_interval_comparison(inst, intervals, r)
        out.instances += 1
        out.checks += 1
        if not res.passed:
            out.violations.append({"index": i, **res.to_dict()})
    return out


def _run_suite(kind: str, worker, n: int, seed: int, workers: int) -> SuiteSummary:
    total = SuiteSummary(kind, seed)
    for part in pmap(worker, chunked(range(n), max(1, workers)), workers):
        total.merge(part)
    return total


def run_pair_suite(n: int = 10_000, seed: int = 0, m_max: int = 60, workers: int = 1) -> SuiteSummary:
    return _run_suite("pollard_pair", partial(_pair_chunk, seed=seed, m_max=m_max), n, seed, workers)


def run_interval_suite(n: int = 1_000, seed: int = 0, workers: int = 1) -> SuiteSummary:
    return _run_suite("pollard_interval", partial(_interval_chunk, seed=seed), n, seed, workers)
