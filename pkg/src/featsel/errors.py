"""Exception types shared across the package."""


class FeatselError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FeatselError, ValueError):
    """An argument or data invariant was violated."""


class CsvParseError(ValidationError):
    """A CSV cell or row could not be parsed; message names row and column."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class FeasibilityError(FeatselError):
    """A classifier cannot be fitted at the requested dimension.

    Carries the ridge-free feasibility bound so callers can cap sweeps.
    """

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class SingularityError(FeatselError):
    """A covariance matrix was not positive definite even after ridging.

    ``class_index`` is the offending class, or -1 for the pooled matrix.
    """

    def __init__(self, message, class_index=None):
        super().__init__(message)
        self.class_index = class_index


class SelectionError(FeatselError):
    """A sequential or exhaustive search could not proceed."""
