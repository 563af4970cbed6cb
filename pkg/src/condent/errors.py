"""Exception types raised across the package."""


class CondentError(Exception):
    """Base class for all package errors."""


class NotHermitian(CondentError, ValueError):
    pass


class NegativeEigenvalue(CondentError, ValueError):
    pass


class DimensionMismatch(CondentError, ValueError):
    pass


class ShrinkNotAllowed(CondentError, ValueError):
    pass


class NotDensityMatrix(CondentError, ValueError):
    """A matrix failed density-operator validation.

    Attributes:
        invariant: name of the failed check (``"hermitian"``, ``"psd"``,
            ``"trace"`` or ``"dims"``).
        magnitude: size of the violation.
    """

    def __init__(self, invariant: str, magnitude: float, message: str = ""):
        self.invariant = invariant
        self.magnitude = float(magnitude)
        super().__init__(message or f"{invariant} violated by {magnitude:.3e}")


class NotTracePreserving(CondentError, ValueError):
    pass


class NotCompletelyPositive(CondentError, ValueError):
    pass


class InvalidParams(CondentError, ValueError):
    pass


class InvalidAlpha(CondentError, ValueError):
    pass


class WrongSignRegime(CondentError, ValueError):
    pass


class NotPSD(CondentError, ValueError):
    pass


class RankObstruction(CondentError, ValueError):
    pass


class SolverFailure(CondentError, RuntimeError):
    def __init__(self, status: str, message: str = ""):
        self.status = status
        super().__init__(message or f"solver returned status {status!r}")


class ParseError(CondentError, ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
