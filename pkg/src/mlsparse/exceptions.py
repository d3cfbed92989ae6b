"""Exception hierarchy shared by all modules."""


class MLSparseError(Exception):
    """Base class for errors raised by mlsparse."""


class GraphFormatError(MLSparseError, ValueError):
    """An edge-list or terminal document could not be parsed.

    ``line`` holds the 1-based line number when the failure is tied to
    a specific line of the input.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedGraphError(MLSparseError, ValueError):
    """A solver entry point received a disconnected graph."""


class DistortionError(MLSparseError, ValueError):
    """A distortion function violated f(x) >= x or could not be evaluated."""


class GuardExceededError(MLSparseError, RuntimeError):
    """An exact routine was asked to solve an instance beyond its size guard."""


class InfeasibleError(MLSparseError, RuntimeError):
    """No feasible solution exists (or an internal verification failed)."""
