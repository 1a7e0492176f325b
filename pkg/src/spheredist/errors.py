"""Exception hierarchy shared by every module.

The CLI maps :class:`ParameterError` (and its subclasses) to exit code 2 and
anything else to exit code 1.
"""


class SphereDistError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SphereDistError, ValueError):
    """An argument violates an operation's precondition."""


class ParseError(ParameterError):
    """A point-set or grid file is malformed.

    ``line`` is the 1-based line number of the offending line, or ``None``
    when the problem is not tied to a single line.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapacityError(SphereDistError):
    """A computation would exceed the configured size budget."""


class PaddingError(ParameterError):
    """Truncate-mode grid is too small: translated spheres would wrap around."""
