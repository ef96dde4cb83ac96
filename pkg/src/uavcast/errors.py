"""Exception types shared across the package."""


class UavcastError(Exception):
    """Base class for all package errors."""


class ParameterError(UavcastError):
    """A configuration value or function argument is out of range."""


class NumericError(UavcastError):
    """A quadrature or other numeric routine failed to meet its tolerance."""


class IntegrityError(UavcastError):
    """An internal consistency check failed (e.g. a pdf does not normalize)."""
