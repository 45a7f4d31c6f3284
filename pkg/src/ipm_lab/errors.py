"""Exception hierarchy for the solver library."""


class IpmLabError(Exception):
    """Base class for all library-specific errors."""


class DimensionError(IpmLabError, ValueError):
    """Operands have incompatible shapes."""


class FactorizationError(IpmLabError):
    """A direct factorization failed (indefinite or singular matrix)."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class NumericalError(IpmLabError):
    """An iterative kernel failed to converge or produced non-finite values."""


class RankDeficientError(IpmLabError):
    """Constraint matrix is not full row rank; see the reductions module."""


class LeftInteriorError(IpmLabError):
    """A proposed iterate left the strict interior (x > 0, s > 0)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InvalidStartError(IpmLabError):
    """The start point is outside the required neighborhood or infeasible."""


class ConvergenceFailureError(IpmLabError):
    """An iteration cap was reached before the stopping criterion."""

    def __init__(self, message, residual_history=None, trace=None):
        super().__init__(message)
        self.residual_history = residual_history
        self.trace = trace


class SketchTooWideError(IpmLabError):
    """Requested sketch has more columns than rows (w > n)."""


class InconsistentPairError(IpmLabError):
    """A (dy, v) pair does not satisfy the error-adjusted system."""


class RankMismatchError(IpmLabError):
    """Declared rank does not match the matrix handed to a reduction."""


class DegenerateFitError(IpmLabError):
    """Least-squares fit is degenerate (constant regressor)."""


class LpFileError(IpmLabError, ValueError):
    """An LP file failed to parse or validate."""
