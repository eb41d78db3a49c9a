"""Exception types raised across the package."""


class StokesMACError(Exception):
    """Base class for all package errors."""


class InvalidOperandError(StokesMACError, ValueError):
    """Operands live on incompatible grid families or axes."""


class GhostError(StokesMACError):
    """A stencil needs ghost/boundary entries that were never populated."""


class GridTooCoarseError(StokesMACError):
    """The grid does not resolve the interface (multiple crossings per arm)."""


class NumericalError(StokesMACError, ArithmeticError):
    """A small dense solve or a root search failed."""


class GeometryError(StokesMACError):
    """Crossing data inconsistent with the grid it was computed on."""


class SolverFailure(StokesMACError):
    """Outer CG did not converge.  ``history`` holds the residual norms."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class InvalidProblemError(StokesMACError, ValueError):
    """A problem definition violates one of its identities."""
