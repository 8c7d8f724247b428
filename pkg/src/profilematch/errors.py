"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific type that applies rather than bare ValueError.
"""


class ProfileMatchError(ValueError):
    """Base class for all input and contract violations."""


class InputFormatError(ProfileMatchError):
    """Malformed or non-numeric input (bad CSV, invalid weights, bad config)."""


class DimensionMismatchError(ProfileMatchError):
    """Shapes that cannot be combined: non-square matrix, n != m, d mismatch."""
