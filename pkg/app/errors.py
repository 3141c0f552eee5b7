"""
Exception hierarchy shared by the services, the CLI and the HTTP layer.

Input problems subclass ValueError, numerical failures subclass RuntimeError,
so callers that only care about the broad category can catch the builtins.
"""


class DrumheadError(Exception):
    """Base class for every error raised on purpose by this package."""


class InvalidShapeError(DrumheadError, ValueError):
    """Input violates a geometric or parameter invariant."""


class AdjustmentRejected(InvalidShapeError):
    """An isoperimetric adjustment would break convexity or the angle guard."""


class NotInClassError(DrumheadError, ValueError):
    """The invariants admit no shape of the requested class."""


class PreconditionError(DrumheadError, ValueError):
    """Numerical preconditions of an operation are not met by its input."""


class ConvergenceError(DrumheadError, RuntimeError):
    """A solver did not converge to the requested accuracy."""


class LemmaViolationError(DrumheadError, RuntimeError):
    """An internal audit contradicted a proven geometric statement."""
