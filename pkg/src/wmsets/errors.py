"""Exception hierarchy shared by all modules.

The CLI maps :class:`PreconditionError` (and its subclasses) to exit status 1
and :class:`ConsistencyError` to exit status 2.
"""


class WmsetsError(Exception):
    """Base class for all errors raised by the package."""


class PreconditionError(WmsetsError, ValueError):
    """An operation was called with arguments outside its contract."""


class ParseError(PreconditionError):
    """Invalid polynomial, set descriptor or real-number syntax."""


class HorizonError(PreconditionError):
    """A computation would address integers beyond a set's horizon.

    The message names the binding constraint.
    """


class PrecisionError(PreconditionError):
    """A fixed-precision real cannot decide a boundary comparison."""


class ExceptionalOnlyError(PreconditionError):
    """Every shift in the supplied sample is exceptional for some node."""


class ConsistencyError(WmsetsError):
    """An internal-consistency check failed (would contradict the theory)."""


class DepthExceededError(ConsistencyError):
    """A reduction tree grew deeper than the allowed maximum."""


class FactViolationError(ConsistencyError):
    """A reduction fact failed outside the symbolic exceptional set."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
