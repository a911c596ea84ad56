"""Exception hierarchy shared by all modules."""


class MimoPhaseError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MimoPhaseError, ValueError):
    pass


class NotCramped(MimoPhaseError):
    """Raised when a matrix (or a frequency response sample) has 0 in its
    numerical range, so its phases are undefined.

    ``frequency`` carries the offending frequency for system-level callers.
    """

    def __init__(self, message="matrix is not cramped", frequency=None):
        super().__init__(message)
        self.frequency = frequency


class NumericallySingular(MimoPhaseError):
    pass


class TransferSyntaxError(MimoPhaseError, ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class NonProperEntry(MimoPhaseError, ValueError):
    pass


class NonSquare(MimoPhaseError, ValueError):
    pass


class PoleHit(MimoPhaseError, ZeroDivisionError):
    pass


class ResonantFrequency(MimoPhaseError):
    pass


class ToleranceNotMet(MimoPhaseError):
    pass


class Unstable(MimoPhaseError):
    pass


class IllPosed(MimoPhaseError):
    pass


class ImaginaryAxisEigenvalue(MimoPhaseError):
    pass


class AlphaOutOfRange(MimoPhaseError, ValueError):
    pass
