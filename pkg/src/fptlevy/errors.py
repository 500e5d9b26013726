"""Exception hierarchy shared across the package.

Domain and usage mistakes (bad parameter signs, mismatched shapes) raise
plain ``ValueError``; everything that can only be detected numerically at
run time derives from :class:`FptError` so callers can catch one type.
"""


class FptError(Exception):
    """Base class for numerical failures raised by this package."""


class UnsupportedModelError(FptError):
    """The requested operation is not defined for this subordinator family."""


class AccuracyError(FptError):
    """A quadrature could not certify the requested tolerance.

    Carries the estimated residual so callers can decide whether a refined
    configuration is worth retrying.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResolutionError(FptError):
    """A grid is too coarse, or inconsistent with the model, for the task."""


class NumericalError(FptError):
    """Non-finite intermediate result; carries the iteration index if known."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
