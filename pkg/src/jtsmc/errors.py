"""Exception types shared across the package."""


class JtsmcError(Exception):
    """Base class for all package errors."""


class NotDecomposable(JtsmcError):
    """The graph is not chordal, so no junction tree exists."""


class UnknownSeparator(JtsmcError):
    """The requested separator does not occur in the junction tree."""


class InconsistentExpansion(JtsmcError):
    """The target tree does not restrict to the source tree's graph."""


class EmptySupport(JtsmcError):
    """A backward kernel was asked to sample from an empty collapse support."""


class AllWeightsZero(JtsmcError):
    """Every particle received zero weight (prior/data inconsistency)."""


class TooLarge(JtsmcError):
    """Exhaustive enumeration was requested beyond the guarded size."""


class DimensionMismatch(JtsmcError):
    """Data, cardinalities or hyperparameters have inconsistent shapes."""


class NotPositiveDefinite(JtsmcError):
    """A covariance construction failed its positive-definiteness check."""

    def __init__(self, minor_index, message=None):
        self.minor_index = minor_index
        super().__init__(message or f"leading minor {minor_index} is not positive definite")


class ParseError(JtsmcError):
    """A persisted artifact could not be parsed."""

    def __init__(self, line_number, message):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")
