"""Exception hierarchy shared by all modules."""


class QctmcError(Exception):
    """Base class for every error raised by this package."""


class PrecisionExhausted(QctmcError):
    """A certified decision could not be reached below the precision cap."""


class DimensionMismatch(QctmcError, ValueError):
    pass


class ClusterAmbiguity(QctmcError):
    pass


class IllConditioned(QctmcError):
    """A linear solve could not be certified at the precision cap."""


class InvalidGenerator(QctmcError, ValueError):
    pass


class RealnessViolation(QctmcError):
    pass


class NormalizationAmbiguity(QctmcError):
    """Two structurally distinct exponents could not be told apart."""


class UnknownSignal(QctmcError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class BasisUndetermined(QctmcError):
    pass


class ReconstructionFailure(QctmcError):
    pass


class DepthExceeded(QctmcError):
    """Root isolation recursed past its depth cap.

    Usually means a (near-)repeated root or a rational root inside the
    window, i.e. the input requirements of the isolation routine fail.
    """


class FormulaSyntaxError(QctmcError, SyntaxError):
    def __init__(self, message, position=None, text=None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position
        self.text = text


class MalformedInterval(FormulaSyntaxError):
    pass


class ModelError(QctmcError, ValueError):
    """Raised when a model fails validation; carries the itemized report."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)
