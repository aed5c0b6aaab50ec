"""Exception types shared across the package."""


class FracPoissonError(Exception):
    """Base class for all package errors."""


class InvalidParameter(FracPoissonError, ValueError):
    """A parameter violates the constraints of the requested object."""


class NonConvergence(FracPoissonError):
    """A series hit its term cap before the stagnation rule fired.

    ``level`` names the series level that failed (for nested sums) and
    ``location`` carries an optional ``(k, t)`` cell.
    """

    def __init__(self, message, *, level="series", location=None):
        super().__init__(message)
        self.level = level
        self.location = location

    def __str__(self):
        msg = super().__str__()
        if self.location is not None:
            msg = f"{msg} at (k, t) = {self.location}"
        return msg


class ZeroConstantTerm(FracPoissonError, ValueError):
    """A fractional power was requested of a series with c0 <= 0."""


class SamplingStall(FracPoissonError):
    """A Monte Carlo loop exceeded its safety cap."""


class GridTooCoarse(FracPoissonError, ValueError):
    """A time grid has too few points for a fractional derivative."""
