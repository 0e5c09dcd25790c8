"""Bases, residues mod b**2 and digit systems.

A digit system for base ``b`` is a set of ``b`` residues of Z_{b^2}, one in
each coset of the subgroup ``{0, b, 2b, ..., (b-1)b}``.  Every ``g`` in
Z_{b^2} then splits uniquely as ``g = digit + high`` with ``digit`` in the
digit set and ``high`` a multiple of ``b``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

from .errors import BadBase, DuplicateClass, NotADigit, WrongSize


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Base:
    b: int

    def __post_init__(self):
        if not isinstance(self.b, int) or self.b < 2:
            raise BadBase(f"base must be an integer >= 2, got {self.b!r}")

    @property
    def is_odd(self) -> bool:
        return self.b % 2 == 1

    @cached_property
    def is_prime(self) -> bool:
        return is_prime(self.b)

    @property
    def modulus(self) -> int:
        return self.b * self.b

    def residue(self, g: int) -> int:
        """Reduce an arbitrary integer into ``[0, b**2)``."""
        return g % self.modulus


def _as_base(b) -> Base:
    return b if isinstance(b, Base) else Base(b)


class Decomposition(NamedTuple):
    digit: int
    high: int


class CarryStep(NamedTuple):
    digit_out: int
    carry_out: int
    carried: bool


@dataclass(frozen=True)
class DigitSet:
    """``b`` coset representatives, stored so that ``reps[i] % b == i``."""

    base: Base
    reps: tuple[int, ...]
    _members: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        b = self.base.b
        if len(self.reps) != b:
            raise WrongSize(f"need exactly {b} representatives, got {len(self.reps)}")
        for i, r in enumerate(self.reps):
            if not 0 <= r < self.base.modulus or r % b != i:
                raise DuplicateClass(f"reps[{i}] = {r} is not a reduced member of class {i} mod {b}")
        object.__setattr__(self, "_members", frozenset(self.reps))

    @property
    def b(self) -> int:
        return self.base.b

    @property
    def modulus(self) -> int:
        return self.base.modulus

    @property
    def elements(self) -> frozenset:
        return self._members

    def __contains__(self, x: int) -> bool:
        return x in self._members

    def __iter__(self):
        return iter(self.reps)

    def __len__(self) -> int:
        return len(self.reps)

    def rep(self, g: int) -> int:
        return self.reps[g % self.base.b]

    def scaled(self, u: int) -> DigitSet:
        """Return ``u * A mod b**2``; ``u`` must be a unit mod ``b``."""
        return make_digit_set((u * a for a in self.reps), self.base)

    def centered(self) -> list[int]:
        """Elements as integers in ``(-b**2/2, b**2/2]``, sorted."""
        m = self.modulus
        return sorted(a - m if a > m // 2 else a for a in self.reps)

    def to_dict(self) -> dict:
        return {"base": self.b, "reps": list(self.reps)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def make_digit_set(elements: Iterable[int], b) -> DigitSet:
    """Validate ``elements`` as a digit system for base ``b``.

    Elements are reduced mod ``b**2`` first, so ``{-1, 0, 1}`` is accepted
    for ``b = 3``.
    """
    base = _as_base(b)
    elems = [base.residue(int(e)) for e in elements]
    if len(set(elems)) != len(elems):
        raise DuplicateClass(f"repeated element in {sorted(elems)}")
    if len(elems) != base.b:
        raise WrongSize(f"a base-{base.b} digit set needs {base.b} elements, got {len(elems)}")
    reps: list[int | None] = [None] * base.b
    for e in elems:
        cls = e % base.b
        if reps[cls] is not None:
            raise DuplicateClass(f"{reps[cls]} and {e} are both {cls} mod {base.b}")
        reps[cls] = e
    return DigitSet(base, tuple(reps))


def balanced_digits(b) -> DigitSet:
    base = _as_base(b)
    if not base.is_odd:
        raise BadBase(f"balanced digits need an odd base >= 3, got {base.b}")
    h = (base.b - 1) // 2
    return make_digit_set(range(-h, h + 1), base)


def standard_digits(b) -> DigitSet:
    base = _as_base(b)
    return make_digit_set(range(base.b), base)


def decompose(g: int, A: DigitSet) -> Decomposition:
    g = A.base.residue(g)
    digit = A.reps[g % A.b]
    return Decomposition(digit, (g - digit) % A.modulus)


def add_digits(x1: int, x2: int, A: DigitSet) -> CarryStep:
    if x1 not in A or x2 not in A:
        bad = x1 if x1 not in A else x2
        raise NotADigit(f"{bad} is not in the digit set {sorted(A.elements)}")
    s = (x1 + x2) % A.modulus
    z = A.reps[s % A.b]
    t = (s - z) % A.modulus
    return CarryStep(z, t, t != 0)


def digit_set_from_dict(data: dict) -> DigitSet:
    """Parse ``{"base": b, "reps": [...]}`` or ``{"base": b, "elements": [...]}``."""
    if "base" not in data:
        raise WrongSize("digit set JSON needs a 'base' field")
    b = int(data["base"])
    if "reps" in data:
        reps = [int(r) for r in data["reps"]]
        base = Base(b)
        ds = make_digit_set(reps, base)
        if list(ds.reps) != [base.residue(r) for r in reps]:
            raise DuplicateClass("'reps' must be indexed by residue class")
        return ds
    if "elements" in data:
        return make_digit_set(data["elements"], b)
    raise WrongSize("digit set JSON needs 'reps' or 'elements'")


def digit_set_from_json(text: str) -> DigitSet:
    data = json.loads(text)
    if isinstance(data, dict) and "digit_set" in data:
        data = data["digit_set"]
    return digit_set_from_dict(data)
