"""Exception hierarchy.

Configuration problems, numerical failures and I/O failures are kept apart
so the command line can map them onto distinct exit codes.
"""


class FracMagError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(FracMagError, ValueError):
    pass


class GridMismatch(ConfigurationError):
    pass


class DimensionMismatch(ConfigurationError):
    pass


class NonzeroMean(ConfigurationError):
    pass


class NegativeOrderOnNonzeroMean(NonzeroMean):
    pass


class NonDivergenceFreeInput(ConfigurationError):
    pass


class InvalidExponent(ConfigurationError):
    pass


class ExponentTooSmall(InvalidExponent):
    pass


class ExponentOrder(InvalidExponent):
    pass


class NegativeTime(ConfigurationError):
    pass


class WrongDimension(DimensionMismatch):
    pass


class EmptyTrajectory(ConfigurationError):
    pass


class InsufficientSamples(ConfigurationError):
    pass


class NumericalFailure(FracMagError, ArithmeticError):
    pass


class NonFiniteField(NumericalFailure):
    pass


class NonContractive(NumericalFailure):
    pass


class CheckpointError(FracMagError, OSError):
    """Corrupt, truncated or unreadable checkpoint file."""
