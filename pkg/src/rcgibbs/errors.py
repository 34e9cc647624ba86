"""Exception types shared across the package."""


class RcgibbsError(Exception):
    """Base class for all package errors."""


class TooLargeError(RcgibbsError):
    """Requested exact computation exceeds the configured enumeration cap."""


class AllForbiddenError(RcgibbsError):
    """Every configuration violates a hard constraint (partition function is zero)."""


class ZeroSliceError(RcgibbsError):
    """Conditioning on an overlap configuration of probability zero."""


class InfeasibleError(RcgibbsError):
    """No nonnegative normalized solution to a representation system."""


class NonSymmetrizableError(RcgibbsError):
    """A base subset is not level-respecting after overlap reflection."""


class UsageError(RcgibbsError):
    """Invalid command line arguments or malformed input file."""
