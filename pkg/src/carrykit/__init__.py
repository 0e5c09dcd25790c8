"""Exact analysis of carries in single-digit addition under arbitrary digit systems."""

from .carries import (
    CarryStats,
    KSumDistribution,
    balanced_integer_tail,
    carry_count_pairs,
    closed_form_balanced,
    closed_form_standard,
    ksum_carry_count,
    ksum_distribution,
    mixed_carry_count,
    pair_lower_bound,
)
from .errors import (
    BadBase,
    BaseMismatch,
    BudgetExceeded,
    CarryError,
    DuplicateClass,
    NotADigit,
    NotOdd,
    NotPrime,
    PreconditionViolated,
    WrongSize,
)
from .pollard import (
    SumsetInstance,
    check_interval_comparison,
    check_pollard_pair,
    coprime_differences,
    corollary42_check,
    representation_counts,
    theorem12_certificate,
)
from .ring import (
    Base,
    CarryStep,
    Decomposition,
    DigitSet,
    add_digits,
    balanced_digits,
    decompose,
    make_digit_set,
    standard_digits,
)
from .search import SearchResult, canonicalize, enumerate_digit_sets, search_min_carry
from .simulator import ChainStats, exact_expected_carries, partial_sum_uniformity_check, simulate_chain

__version__ = "0.1.0"
