"""Exception hierarchy shared by all modules."""


class InvMeasureError(Exception):
    """Base class for every error raised by this package."""


class DomainError(InvMeasureError, ValueError):
    pass


class PoleError(DomainError):
    pass


class InvalidParameterError(InvMeasureError, ValueError):
    pass


class SingularityError(DomainError):
    pass


class BreakpointError(DomainError):
    pass


class OutOfImageError(DomainError):
    pass


class NoConjugatorError(InvMeasureError):
    pass


class ResonanceError(InvMeasureError):
    pass


class NotFixedPointError(InvMeasureError):
    pass


class DegenerateSolutionError(InvMeasureError):
    pass


class NonIntegrableError(InvMeasureError):
    pass


class NonConvergenceError(InvMeasureError):
    def __init__(self, message, last_change):
        super().__init__(message)
        self.last_change = last_change


class OrbitEscapeError(InvMeasureError):
    pass


class DegenerateOrbitError(InvMeasureError):
    pass


class TooManySkipsError(InvMeasureError):
    pass


class DomainMismatchError(InvMeasureError, ValueError):
    pass


class ConfigError(InvMeasureError, ValueError):
    pass
