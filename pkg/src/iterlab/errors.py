"""Exception hierarchy shared by the numeric modules."""


class IterlabError(Exception):
    """Base class for all errors raised by iterlab."""


class DomainError(IterlabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ParseError(IterlabError, ValueError):
    """A decimal string could not be parsed."""


class PrecisionError(IterlabError, ArithmeticError):
    """The requested accuracy cannot be met at the working precision."""

    def __init__(self, message, required_digits=None):
        super().__init__(message)
        self.required_digits = required_digits


class NumericError(IterlabError, ArithmeticError):
    """An iterative method failed to converge or hit a singular point."""


class BudgetError(NumericError):
    """An iteration cap was exceeded."""


class UsageError(IterlabError, ValueError):
    """Operands are incompatible (e.g. series in different variables)."""
