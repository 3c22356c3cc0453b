"""Exception types shared across the package."""


class QBSimError(Exception):
    pass


class DimensionMismatchError(QBSimError, ValueError):
    pass


class InvariantViolation(QBSimError, RuntimeError):
    """A physical invariant (trace, hermiticity, positivity) broke during a computation."""


class ConfigError(QBSimError, ValueError):
    pass


class DipOutsideWindowError(QBSimError, ValueError):
    pass


class BoundStateError(QBSimError, ValueError):
    pass


class TruncationWarning(UserWarning):
    pass


class StabilityWarning(UserWarning):
    pass


class DiagnosticWarning(UserWarning):
    pass
