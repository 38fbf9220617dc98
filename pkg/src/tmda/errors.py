"""Exception types shared across the package."""


class TmdaError(Exception):
    """Base class for all library errors."""


class ValidationError(TmdaError, ValueError):
    """Raised when inputs violate a documented precondition."""


class DegenerateDataError(ValidationError):
    """Raised when data is too degenerate to process (e.g. all points equal)."""


class DegeneratePartitionError(ValidationError):
    """Raised when a manifold partition has no manifold present in both domains."""


class ParseError(TmdaError, ValueError):
    """Raised on malformed text input; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DivergenceError(TmdaError, RuntimeError):
    """Raised when an iterative solver produces non-finite iterates."""


class NumericalError(TmdaError, RuntimeError):
    """Raised when a dense linear-algebra step fails (e.g. indefinite pencil)."""
