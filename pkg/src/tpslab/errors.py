"""Exception types shared across the package."""


class TpsLabError(Exception):
    """Base class for all library errors."""


class NonHermitianInput(TpsLabError, ValueError):
    pass


class ConvergenceFailure(TpsLabError, RuntimeError):
    pass


class DimensionOverflow(TpsLabError, ValueError):
    pass


class DimensionMismatch(TpsLabError, ValueError):
    pass


class IndexOutOfRange(TpsLabError, IndexError):
    pass


class NonUnitaryBasis(TpsLabError, ValueError):
    pass


class BadFactorization(TpsLabError, ValueError):
    pass


class OddBathDimension(TpsLabError, ValueError):
    pass


class NotEigenbasisInduced(TpsLabError, ValueError):
    pass


class EmptyTrajectory(TpsLabError, ValueError):
    pass


class EmptyWindow(TpsLabError, ValueError):
    pass


class ConfigInvalid(TpsLabError, ValueError):
    """Raised for malformed scenario configs; ``field`` is the dotted path."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class InsufficientHorizon(UserWarning):
    """Time-average horizon shorter than 50 / (smallest level spacing)."""
