"""Exception hierarchy shared by every module.

The CLI maps :class:`ParameterError` subclasses to exit code 2 and
:class:`NumericError` subclasses to exit code 3.
"""


class BesselRatioError(Exception):
    """Base class for all package errors."""


class ParameterError(BesselRatioError, ValueError):
    """The caller asked for something outside a documented domain."""


class NumericError(BesselRatioError, ArithmeticError):
    """A numerical procedure could not deliver the promised result."""


class NonFiniteInput(ParameterError):
    pass


class UnsupportedParameterRange(ParameterError):
    pass


class NegativeRadicand(ParameterError):
    pass


class NoSolution(ParameterError):
    pass


class ConvergenceFailure(NumericError):
    pass


class PrecisionUnreachable(NumericError):
    pass


class DerivativeOutOfRange(NumericError):
    pass


class DenominatorNearZero(NumericError):
    pass


class BracketFailure(NumericError):
    pass
