"""End-to-end solve of one problem on one grid, and error measurement."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corrections import CorrectedRHS, GridCrossings, assemble_rhs, grid_crossings
from .errors import InvalidProblemError
from .grid import ErrorNorms, Field, GridFamily, StaggeredGrid, norms
from .jumps import InterfaceData, JumpTable, jump_table
from .problems import ProblemSpec
from .solver import AugmentedSystem, StokesFields, solve_stokes


@dataclass
class Solution:
    grid: StaggeredGrid
    fields: StokesFields
    rhs: CorrectedRHS
    crossings: GridCrossings
    jumps: JumpTable | None


def _scaled_data(data: InterfaceData, mu: float) -> InterfaceData:
    if mu == 1.0:
        return data
    inv = 1.0 / mu

    def psi(t):
        a, b = data.psi(t)
        return a * inv, b * inv

    def f_jump(t):
        a, b = data.f_jump(t)
        return a * inv, b * inv

    def psi_prime(t):
        a, b = data.psi_prime(t)
        return a * inv, b * inv

    return InterfaceData(psi, f_jump, psi_prime if data.psi_prime is not None else None)


def solve_problem(
    spec: ProblemSpec,
    n: int,
    tol: float | None = None,
    corrections: bool = True,
    maxiter: int | None = None,
) -> Solution:
    """Build the grid, corrected right-hand side and solve.

    A constant viscosity is removed by dividing the traction and force data
    by ``mu`` and multiplying the computed pressure by it.
    """
    if spec.mu <= 0.0:
        raise InvalidProblemError(f"{spec.name}: viscosity must be positive")
    grid = StaggeredGrid(n, spec.origin, spec.extent)
    mu = spec.mu
    curve = spec.curve if corrections else None
    gc = grid_crossings(grid, curve)
    table = None
    if curve is not None and len(gc):
        table = jump_table(curve, _scaled_data(spec.interface_data, mu), gc.crossings)

    def forcing_at(x, y):
        f1, f2 = spec.f_at(x, y)
        return f1 / mu, f2 / mu

    rhs = assemble_rhs(grid, forcing_at, gc, table)
    sys = AugmentedSystem(grid, rhs.f1.values, rhs.f2.values, rhs.g.values, trace=spec.boundary_trace)
    out = solve_stokes(sys, tol=tol, maxiter=maxiter)
    if mu != 1.0:
        out.p = Field(grid, GridFamily.CELL, out.p.values * mu)
        out.lam *= mu
    return Solution(grid, out, rhs, gc, table)


def exact_fields(spec: ProblemSpec, grid: StaggeredGrid) -> tuple[Field, Field, Field]:
    """Exact u1, u2, p restricted to every stored point, ghost points included.

    Ghosts lie h/2 outside the domain; the exterior formula is evaluated there.
    """
    if spec.exact is None:
        raise InvalidProblemError(f"{spec.name}: no exact solution")
    out = []
    for which, fam in (("u1", GridFamily.VEDGE), ("u2", GridFamily.HEDGE), ("p", GridFamily.CELL)):
        X, Y = grid.coords(fam)
        out.append(Field(grid, fam, spec.exact_value(which, X, Y)))
    return tuple(out)


@dataclass(frozen=True)
class ErrorReport:
    absolute: ErrorNorms
    reference: ErrorNorms
    scaled: ErrorNorms


def _zero_mean(p: np.ndarray) -> np.ndarray:
    return p - p.mean()


def solution_errors(spec: ProblemSpec, sol: Solution) -> ErrorReport:
    """Errors relative to the exact solution's own discrete norms.

    Pressures are compared after removing their means.
    """
    grid = sol.grid
    eu1, eu2, ep = exact_fields(spec, grid)
    f = sol.fields
    d1 = Field(grid, GridFamily.VEDGE, f.u1.values - eu1.values)
    d2 = Field(grid, GridFamily.HEDGE, f.u2.values - eu2.values)
    dp = Field(grid, GridFamily.CELL, _zero_mean(f.p.values) - _zero_mean(ep.values))
    ref_p = Field(grid, GridFamily.CELL, _zero_mean(ep.values))
    absolute = norms(d1, d2, dp)
    reference = norms(eu1, eu2, ref_p)

    def ratio(a, b):
        return a / b if b > 0 else a

    scaled = ErrorNorms(
        *(ratio(getattr(absolute, k), getattr(reference, k)) for k in ErrorNorms.__dataclass_fields__)
    )
    return ErrorReport(absolute, reference, scaled)
