"""Exception hierarchy shared by the library and the CLI."""


class MaxLinError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(MaxLinError, ValueError):
    """An argument violates a documented precondition."""


class MalformedGraphError(InvalidArgumentError):
    """Edge list contains a cycle, self-loop, duplicate or out-of-range node."""


class MalformedDataError(MaxLinError, ValueError):
    """Sample data is not a finite, strictly positive n x d table."""


class InsufficientDataError(MalformedDataError):
    """Too few observations for the requested estimator."""


class TooManyPathsError(MaxLinError, RuntimeError):
    """Path enumeration exceeded the configured cap."""


class InvariantViolation(MaxLinError, AssertionError):
    """An internal guarantee did not hold; indicates a bug."""
