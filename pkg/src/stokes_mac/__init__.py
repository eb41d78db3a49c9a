"""Second-order MAC scheme for Stokes interface problems with sharp jumps."""
from .errors import (
    GeometryError,
    GhostError,
    GridTooCoarseError,
    InvalidOperandError,
    InvalidProblemError,
    NumericalError,
    SolverFailure,
    StokesMACError,
)
from .grid import ErrorNorms, Field, GridFamily, StaggeredGrid
from .geometry import Circle, Ellipse, PolarCurve
from .problems import ProblemSpec, example1, example2, get_problem, smooth
from .pipeline import solve_problem, solution_errors

__version__ = "0.1.0"

__all__ = [
    "Circle",
    "Ellipse",
    "ErrorNorms",
    "Field",
    "GeometryError",
    "GhostError",
    "GridFamily",
    "GridTooCoarseError",
    "InvalidOperandError",
    "InvalidProblemError",
    "NumericalError",
    "PolarCurve",
    "ProblemSpec",
    "SolverFailure",
    "StaggeredGrid",
    "StokesMACError",
    "example1",
    "example2",
    "get_problem",
    "smooth",
    "solution_errors",
    "solve_problem",
]
