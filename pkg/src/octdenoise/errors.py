"""Exception types shared across the package.

The CLI maps these onto distinct exit codes (see ``octdenoise.cli``):
I/O failures exit with 2, invalid input/configuration with 3, and
numeric failures (including registration breakdown) with 4.
"""


class DenoiseError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(DenoiseError):
    """Bad argument values, malformed configuration, or violated preconditions."""


class DataIOError(DenoiseError):
    """Unreadable, malformed, or truncated image files."""


class NumericError(DenoiseError):
    """Non-finite values or numeric breakdown inside the solver."""


class NumericRangeError(NumericError):
    """A domain transform left the representable range (e.g. exp overflow)."""


class RegistrationError(DenoiseError):
    """Frame registration failed, e.g. on a degenerate (constant) frame."""
