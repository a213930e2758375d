"""Exception types shared across the package."""
from __future__ import annotations


class PrisonersError(Exception):
    """Base class for all errors raised by this package."""


class EmptyRangeError(PrisonersError, ValueError):
    """A summation or search range was empty (for example a > b)."""


class DomainError(PrisonersError, ValueError):
    """A parameter fell outside its mathematical domain."""


class CapabilityError(PrisonersError, RuntimeError):
    """The object lacks the structure or certificate the operation needs."""


class NotMaterializedError(PrisonersError, LookupError):
    """A lazy stream was queried beyond what has been pulled so far."""


class PlanViolationError(PrisonersError, ValueError):
    """A cycle plan or relabeling violated its structural contract."""


class HorizonExhaustedError(PrisonersError, RuntimeError):
    """A bounded search ended without finding the required witness."""


class UndecidedComparisonError(PrisonersError, RuntimeError):
    """Interval refinement ran out of budget before separating two values."""


class UsageError(PrisonersError, ValueError):
    """Bad command line arguments or configuration."""
