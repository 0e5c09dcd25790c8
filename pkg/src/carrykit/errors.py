"""Exception hierarchy. Every error raised by carrykit derives from CarryError."""


class CarryError(ValueError):
    pass


class BadBase(CarryError):
    pass


class WrongSize(CarryError):
    pass


class DuplicateClass(CarryError):
    pass


class NotADigit(CarryError):
    pass


class BaseMismatch(CarryError):
    pass


class NotPrime(BadBase):
    pass


class NotOdd(BadBase):
    pass


class PreconditionViolated(CarryError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class BudgetExceeded(CarryError):
    """Raised when a search runs past its node budget.

    ``incumbent`` holds the best (uncertified) result found so far.
    """

    def __init__(self, message, incumbent=None):
        super().__init__(message)
        self.incumbent = incumbent
