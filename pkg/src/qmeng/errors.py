"""Exception types shared across the package."""


class QmengError(Exception):
    """Base class for all package errors."""


class DomainError(QmengError, ValueError):
    """An input lies outside the domain where the model is defined."""


class DegenerateFieldError(DomainError):
    """Both pulse-on field components vanish, so the precession rate is undefined."""


class UnsupportedInitialStateError(DomainError):
    """Spin evolution was requested for a state other than s+ or s-."""


class CoordinateSingularityError(DomainError):
    """A wavevector lies on the polar axis of the polarization triad."""


class StepTooLargeError(DomainError):
    """The oracle integrator was asked for a step above its accuracy contract."""


class ConvergenceError(QmengError, RuntimeError):
    """A numerical procedure failed to meet its tolerance.

    ``values`` carries the competing estimates (coarse, fine) when available.
    """

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values
