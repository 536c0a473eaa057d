"""Exception types shared across the package."""


class FluxlabError(Exception):
    """Base class for all package errors."""


class ValidationError(FluxlabError, ValueError):
    """Invalid input: degenerate geometry, out-of-range parameters, bad files."""


class NumericalError(FluxlabError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``achieved`` carries the best error estimate reached, when known.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
