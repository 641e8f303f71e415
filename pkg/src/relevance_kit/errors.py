"""Exception hierarchy shared by every module."""
from __future__ import annotations


class RelevanceError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class DimensionError(RelevanceError, ValueError):
    """A state, coordinate or action index is out of range."""


class FormatError(RelevanceError, ValueError):
    """Malformed instance data (bad circuit topology, bad JSON, bad decomposition)."""


class ParseError(FormatError):
    """A text format could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DistributionError(FormatError):
    """Probabilities are negative or do not sum to exactly one."""


class CapacityError(RelevanceError):
    """An explicit enumeration would exceed the configured budget."""

    exit_code = 4

    def __init__(self, what: str, needed: int, budget: int):
        self.needed = needed
        self.budget = budget
        super().__init__(f"{what} needs {needed} entries, budget is {budget}")


class ShapeError(RelevanceError, ValueError):
    """Input does not have the shape a construction requires."""

    exit_code = 5


class OutOfGapError(ShapeError):
    """Threshold outside the promise gap of the shifted family."""


class SymmetryError(RelevanceError, ValueError):
    """A utility claimed to be permutation invariant is not."""

    exit_code = 5

    def __init__(self, message: str, permutation: tuple[int, ...]):
        self.permutation = permutation
        super().__init__(message)


class BudgetExhausted(RelevanceError):
    """Raised by a step counter when its limit is crossed."""

    exit_code = 2

    def __init__(self, count: int, limit: int):
        self.count = count
        self.limit = limit
        super().__init__(f"step budget {limit} exceeded")
