"""Polynomial patterns in weakly mixing sets: exact polynomial tools, the
PET reduction calculus, set generators, shift diagnostics and counting."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConsistencyError,
    DepthExceededError,
    ExceptionalOnlyError,
    FactViolationError,
    HorizonError,
    ParseError,
    PrecisionError,
    PreconditionError,
    WmsetsError,
)
from .polynomials import (  # noqa: E402
    BivariatePolynomial,
    IntPolynomial,
    parse_family,
    parse_polynomial,
    parse_univariate,
)
from .integer_sets import IntegerSet  # noqa: E402

__all__ = [
    "__version__",
    "WmsetsError", "PreconditionError", "ParseError", "HorizonError", "PrecisionError",
    "ExceptionalOnlyError", "ConsistencyError", "DepthExceededError", "FactViolationError",
    "IntPolynomial", "BivariatePolynomial", "parse_polynomial", "parse_univariate", "parse_family",
    "IntegerSet",
]
