"""High-precision experiments on iterated maps.

Modules:

* :mod:`iterlab.precision` - decimal reals with explicit working precision
* :mod:`iterlab.formal` - rationals, polynomials and truncated series
* :mod:`iterlab.cf_rates` - convergence constants of metallic-mean continued fractions
* :mod:`iterlab.abel` - Abel functions of the cubic family ``x - a x^2 + x^3``
* :mod:`iterlab.translated` - the recurrence ``x + 1 + 1/x^2`` and its constant ``C``
"""

from .errors import (
    BudgetError,
    DomainError,
    IterlabError,
    NumericError,
    ParseError,
    PrecisionError,
    UsageError,
)
from .precision import Real, real_from_decimal

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "DomainError",
    "IterlabError",
    "NumericError",
    "ParseError",
    "PrecisionError",
    "Real",
    "UsageError",
    "real_from_decimal",
]
