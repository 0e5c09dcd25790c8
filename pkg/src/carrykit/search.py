"""Minimum carry count over all digit sets of a base.

Two modes produce identical ``min_count`` and canonical witnesses:

* ``exhaustive`` evaluates every one of the b**b digit sets, vectorised with
  numpy over blocks that share a prefix of class choices.
* ``branch_and_bound`` assigns representatives class by class (0, 1, ...,
  b-1) and prunes a branch once the tuples it has already determined carry
  more often than the incumbent.  Because multiplication by ``1 + j*b`` fixes
  every class and shifts only the lift of class 1, class 1 is pinned to the
  representative 1 and raw witness totals are scaled back by exactly ``b``.

Pruning is strict (bound > incumbent) so that every minimiser is reached.
"""

from __future__ import annotations

import itertools
import math
import multiprocessing as mp
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .carries import carry_count_pairs, ksum_carry_count
from .errors import BudgetExceeded
from .ring import Base, DigitSet, _as_base, balanced_digits, make_digit_set, standard_digits

DEFAULT_BUDGET = 10**9
DEFAULT_WITNESS_CAP = 100
MODES = ("exhaustive", "branch_and_bound")
_BLOCK_ROWS = 1 << 18


def canonical_key(A: DigitSet) -> tuple[int, ...]:
    return tuple(sorted(A.reps))


def units(b: int) -> list[int]:
    """Residues u in [1, b**2) with gcd(u, b) = 1."""
    return [u for u in range(1, b * b) if math.gcd(u, b) == 1]


def canonicalize(A: DigitSet) -> DigitSet:
    """Lexicographically least (by sorted elements) member of the orbit ``{u*A}``."""
    m = A.modulus
    best = min(tuple(sorted(u * a % m for a in A.reps)) for u in units(A.b))
    return make_digit_set(best, A.base)


def enumerate_digit_sets(b) -> Iterator[DigitSet]:
    """All b**b digit sets, lexicographic in ``reps`` (class 0 most significant)."""
    base = _as_base(b)
    b = base.b
    for lifts in itertools.product(range(b), repeat=b):
        yield DigitSet(base, tuple(i + b * t for i, t in enumerate(lifts)))


def carry_count(A: DigitSet, k: int = 2) -> int:
    return carry_count_pairs(A).carry_tuples if k == 2 else ksum_carry_count(A, k).carry_tuples


@dataclass
class SearchResult:
    base: Base
    k: int
    mode: str
    min_count: int
    witnesses: list[DigitSet]
    witness_total: int
    canonical_witness_total: int
    certified: bool = True
    nodes_explored: int = 0
    pruned: int = 0
    elapsed: float = 0.0

    @property
    def balanced_attains(self) -> bool | None:
        if not self.base.is_odd:
            return None
        return carry_count(balanced_digits(self.base), self.k) == self.min_count

    def certificate(self) -> dict:
        return {
            "base": self.base.b,
            "k": self.k,
            "mode": self.mode,
            "certified": self.certified,
            "min_count": self.min_count,
            "total_tuples": self.base.b**self.k,
            "witnesses": [{"reps": list(w.reps), "carry_count": carry_count(w, self.k)} for w in self.witnesses],
        }

    def to_dict(self, telemetry: bool = False) -> dict:
        out = {
            "base": self.base.b,
            "k": self.k,
            "mode": self.mode,
            "certified": self.certified,
            "min_count": self.min_count,
            "balanced_attains": self.balanced_attains,
            "witness_total": self.witness_total,
            "canonical_witness_total": self.canonical_witness_total,
            "witnesses": [list(w.reps) for w in self.witnesses],
            "certificate": self.certificate(),
        }
        if telemetry:
            out["telemetry"] = {"nodes_explored": self.nodes_explored, "pruned": self.pruned, "elapsed_s": self.elapsed}
        return out


def verify_certificate(cert: dict) -> bool:
    """Recompute every witness's carry count and compare with ``min_count``."""
    b, k, target = cert["base"], cert["k"], cert["min_count"]
    for w in cert["witnesses"]:
        A = make_digit_set(w["reps"], b)
        if list(A.reps) != w["reps"] or carry_count(A, k) != w["carry_count"] or w["carry_count"] != target:
            return False
    return True


# -- partial results ---------------------------------------------------------


@dataclass
class _Partial:
    best: int = math.inf
    raw: int = 0
    keys: set = field(default_factory=set)
    nodes: int = 0
    pruned: int = 0
    out_of_budget: bool = False

    def offer(self, count: int, key: tuple[int, ...], weight: int = 1) -> None:
        if count < self.best:
            self.best, self.raw, self.keys = count, 0, set()
        if count == self.best:
            self.raw += weight
            self.keys.add(key)

    def merge(self, other: _Partial) -> None:
        if other.best < self.best:
            self.best, self.raw, self.keys = other.best, other.raw, set(other.keys)
        elif other.best == self.best:
            self.raw += other.raw
            self.keys |= other.keys
        self.nodes += other.nodes
        self.pruned += other.pruned
        self.out_of_budget |= other.out_of_budget


def _canonical_key_of(reps: tuple[int, ...], b: int, unit_list: list[int]) -> tuple[int, ...]:
    m = b * b
    return min(tuple(sorted(u * a % m for a in reps)) for u in unit_list)


# -- exhaustive --------------------------------------------------------------


def _class_tuples(b: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    tuples = np.array(list(itertools.product(range(b), repeat=k)), dtype=np.int64).reshape(-1, k)
    return tuples, tuples.sum(axis=1) % b


def batch_carry_counts(reps: np.ndarray, b: int, k: int = 2) -> np.ndarray:
    """Carry counts for a stack of digit sets, one per row of ``reps`` (row[i] % b == i)."""
    m = b * b
    out = np.zeros(reps.shape[0], dtype=np.int64)
    if k == 2:
        for i in range(b):
            for j in range(b):
                s = (reps[:, i] + reps[:, j]) % m
                out += s != reps[:, (i + j) % b]
        return out
    tuples, sum_cls = _class_tuples(b, k)
    for tup, c in zip(tuples, sum_cls):
        s = reps[:, tup].sum(axis=1) % m
        out += s != reps[:, c]
    return out


def _prefix_len(b: int) -> int:
    c = 0
    while b ** (b - c) > _BLOCK_ROWS:
        c += 1
    return c


def _block_reps(b: int, prefix: tuple[int, ...]) -> np.ndarray:
    c = len(prefix)
    free = b - c
    idx = np.arange(b**free, dtype=np.int64)
    lifts = np.empty((idx.size, b), dtype=np.int64)
    lifts[:, :c] = prefix
    for col in range(b - 1, c - 1, -1):
        lifts[:, col] = idx % b
        idx //= b
    return np.arange(b, dtype=np.int64) + b * lifts


def _exhaustive_task(args) -> _Partial:
    b, k, prefix = args
    unit_list = units(b)
    reps = _block_reps(b, prefix)
    counts = batch_carry_counts(reps, b, k)
    part = _Partial(nodes=reps.shape[0])
    lo = int(counts.min())
    rows = reps[counts == lo]
    part.best, part.raw = lo, rows.shape[0]
    part.keys = {_canonical_key_of(tuple(int(x) for x in row), b, unit_list) for row in rows}
    return part


def _exhaustive(b: int, k: int, workers: int, budget: int) -> _Partial:
    prefixes = list(itertools.product(range(b), repeat=_prefix_len(b)))
    tasks = [(b, k, p) for p in prefixes]
    total = _Partial()
    block = b ** (b - _prefix_len(b))
    if workers <= 1:
        for t in tasks:
            if total.nodes + block > budget:
                total.out_of_budget = True
                break
            total.merge(_exhaustive_task(t))
        return total
    n_fit = min(len(tasks), budget // block)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for part in ex.map(_exhaustive_task, tasks[:n_fit]):
            total.merge(part)
    total.out_of_budget = n_fit < len(tasks)
    return total


# -- branch and bound --------------------------------------------------------

_shared_best = None


def _init_shared(value) -> None:
    global _shared_best
    _shared_best = value


def _read_shared(local: float) -> float:
    if _shared_best is None:
        return local
    v = _shared_best.value
    return min(local, v) if v >= 0 else local


def _publish(best: int) -> None:
    if _shared_best is None:
        return
    with _shared_best.get_lock():
        if _shared_best.value < 0 or best < _shared_best.value:
            _shared_best.value = best


def _pair_schedule(b: int) -> list[list[tuple[int, int, int]]]:
    """Class pairs grouped by the depth at which their carry status becomes known."""
    sched: list[list[tuple[int, int, int]]] = [[] for _ in range(b)]
    for i in range(b):
        for j in range(b):
            sc = (i + j) % b
            sched[max(i, j, sc)].append((i, j, sc))
    return sched


class _Bounder:
    """Lower bound on carries given representatives for classes 0..depth."""

    def __init__(self, b: int, k: int):
        self.b, self.k, self.m = b, k, b * b
        self.sched = _pair_schedule(b) if k == 2 else None

    def increment(self, reps: list[int], depth: int) -> int:
        m = self.m
        return sum(1 for i, j, sc in self.sched[depth] if (reps[i] + reps[j]) % m != reps[sc])

    def full(self, reps: list[int], depth: int) -> int:
        m, b = self.m, self.b
        chosen = reps[: depth + 1]
        ind = np.zeros(m, dtype=np.int64)
        ind[chosen] = 1
        dist = ind
        for _ in range(self.k - 1):
            dist = sum(np.roll(dist, a) for a in chosen)
        x = np.arange(m)
        cls = x % b
        assigned = cls <= depth
        rep_of = np.array(chosen + [-1] * (b - depth - 1))
        mask = assigned & (x != rep_of[cls])
        return int(dist[mask].sum())


def _bnb_task(args) -> _Partial:
    b, k, prefix, incumbent, budget = args
    unit_list = units(b)
    bounder = _Bounder(b, k)
    part = _Partial()
    reps = [0] * b
    best = [incumbent]
    last_depth = b - 1

    def visit(depth: int, acc: int) -> None:
        if part.out_of_budget:
            return
        part.nodes += 1
        if part.nodes > budget:
            part.out_of_budget = True
            return
        if k == 2:
            acc += bounder.increment(reps, depth)
        else:
            acc = bounder.full(reps, depth)
        if part.nodes & 1023 == 0:
            best[0] = _read_shared(best[0])
        if acc > best[0]:
            part.pruned += 1
            return
        if depth == last_depth:
            part.offer(acc, _canonical_key_of(tuple(reps), b, unit_list), weight=b)
            if acc < best[0]:
                best[0] = acc
                _publish(acc)
            return
        nxt = depth + 1
        lifts = (0,) if nxt == 1 else range(b)
        for t in lifts:
            reps[nxt] = nxt + b * t
            visit(nxt, acc)

    # replay the fixed prefix (classes 0 .. len(prefix)-1) before branching
    acc = 0
    for d, t in enumerate(prefix):
        reps[d] = d + b * t
        part.nodes += 1
        acc = acc + bounder.increment(reps, d) if k == 2 else bounder.full(reps, d)
    d = len(prefix) - 1
    if acc > best[0]:
        part.pruned += 1
    elif d == last_depth:
        part.offer(acc, _canonical_key_of(tuple(reps), b, unit_list), weight=b)
    else:
        nxt = d + 1
        for t in ((0,) if nxt == 1 else range(b)):
            reps[nxt] = nxt + b * t
            visit(nxt, acc)
    return part


def _bnb_prefixes(b: int, workers: int) -> list[tuple[int, ...]]:
    if b == 2:
        return [(t0, 0) for t0 in range(b)]
    if workers <= 1:
        return [(t0,) for t0 in range(b)]
    return [(t0, 0, t2) for t0 in range(b) for t2 in range(b)]


def _branch_and_bound(b: int, k: int, workers: int, budget: int) -> _Partial:
    seeds = [standard_digits(b)] + ([balanced_digits(b)] if b % 2 else [])
    incumbent = min(carry_count(A, k) for A in seeds)
    prefixes = _bnb_prefixes(b, workers)
    total = _Partial()
    if workers <= 1:
        for p in prefixes:
            part = _bnb_task((b, k, p, min(incumbent, total.best), budget - total.nodes))
            total.merge(part)
            if total.out_of_budget:
                break
        return _fallback(total, seeds, k)
    ctx = mp.get_context("fork")
    shared = ctx.Value("q", incumbent)
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx, initializer=_init_shared, initargs=(shared,)) as ex:
        for part in ex.map(_bnb_task, [(b, k, p, incumbent, budget) for p in prefixes]):
            total.merge(part)
    total.out_of_budget |= total.nodes > budget
    return _fallback(total, seeds, k)


def _fallback(total: _Partial, seeds: list[DigitSet], k: int) -> _Partial:
    # an exhausted budget may leave no leaf reached; report the seed incumbent instead
    if total.out_of_budget and total.best == math.inf:
        for A in seeds:
            total.offer(carry_count(A, k), canonical_key(canonicalize(A)))
    return total


def search_min_carry(
    b,
    k: int = 2,
    mode: str = "branch_and_bound",
    workers: int = 1,
    budget: int = DEFAULT_BUDGET,
    witness_cap: int = DEFAULT_WITNESS_CAP,
) -> SearchResult:
    """Minimum k-fold carry count over every digit set of base ``b``.

    Raises :class:`BudgetExceeded` carrying an uncertified incumbent if the
    node budget runs out.  ``min_count`` and the witness list depend only on
    ``(b, k)``; worker count changes telemetry only.
    """
    base = _as_base(b)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    start = time.perf_counter()
    run = _exhaustive if mode == "exhaustive" else _branch_and_bound
    part = run(base.b, k, workers, budget)
    keys = sorted(part.keys)
    result = SearchResult(
        base=base,
        k=k,
        mode=mode,
        min_count=int(part.best) if part.best != math.inf else -1,
        witnesses=[make_digit_set(key, base) for key in keys[:witness_cap]],
        witness_total=part.raw,
        canonical_witness_total=len(keys),
        certified=not part.out_of_budget,
        nodes_explored=part.nodes,
        pruned=part.pruned,
        elapsed=time.perf_counter() - start,
    )
    if part.out_of_budget:
        raise BudgetExceeded(f"node budget {budget} exhausted for base {base.b}, k={k}", incumbent=result)
    return result
