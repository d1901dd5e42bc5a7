"""Exception types shared across the package."""


class MpcosineError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteValueError(MpcosineError, ValueError):
    """A sampled or supplied value is NaN or infinite."""


class GridFormatError(MpcosineError, ValueError):
    """CSV input does not describe a valid uniform-grid function."""


class ParseError(MpcosineError, ValueError):
    """Expression source could not be parsed.

    Carries the byte offset of the offending token in ``offset``.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EvaluationDomainError(MpcosineError, ValueError):
    """Expression evaluation left the real domain (log, sqrt, division)."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (source offset {offset})"
        super().__init__(message)
        self.offset = offset


class RangeError(MpcosineError, ValueError):
    """Requested point or time lies outside the represented range."""


class InvariantError(MpcosineError, RuntimeError):
    """A structural identity that must hold on output was violated."""


class ConvergenceError(MpcosineError, RuntimeError):
    """Iteration failed to converge; ``residual`` holds the final residual."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


class NearSingularError(MpcosineError, RuntimeError):
    """A linear system is too close to singular to solve reliably."""
