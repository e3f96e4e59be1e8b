"""Exception types raised across the package."""


class G2AssocError(Exception):
    """Base class for all package errors."""


class DegeneratePlane(G2AssocError, ValueError):
    pass


class ZeroVector(G2AssocError, ValueError):
    pass


class NotInComplement(G2AssocError, ValueError):
    pass


class ModulusOutOfRange(G2AssocError, ValueError):
    pass


class InvalidCaseParams(G2AssocError, ValueError):
    pass


class StepSizeUnderflow(G2AssocError, RuntimeError):
    def __init__(self, t, message=None):
        self.t = t
        super().__init__(message or f"step size underflow at t={t!r}")


class OutOfSpan(G2AssocError, ValueError):
    pass


class ModelPreconditionViolated(G2AssocError, ValueError):
    pass


class AlphaConstraintViolated(G2AssocError, ValueError):
    pass


class DegenerateEigenspace(G2AssocError, RuntimeError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class ResonantFrequency(G2AssocError, ValueError):
    pass


class InvalidFraction(G2AssocError, ValueError):
    pass


class DriftPresent(G2AssocError, RuntimeError):
    def __init__(self, message, drift=None):
        self.drift = drift
        super().__init__(message)


class NoCommonPeriod(G2AssocError, RuntimeError):
    pass


class FitUnstable(G2AssocError, RuntimeError):
    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class GridTooCoarse(G2AssocError, RuntimeError):
    pass


class BlowUp(G2AssocError, RuntimeError):
    pass


class UnsupportedFormat(G2AssocError, ValueError):
    pass


class ConfigError(G2AssocError, ValueError):
    """Malformed configuration or input document."""
