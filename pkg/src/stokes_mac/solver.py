"""Augmented MAC Stokes system: fast Poisson solves and Schur-complement CG.

With A = -Delta_h (homogeneous closure), G = forward differences of p onto
interior edges and D = backward-difference divergence (G = -D^T), the
augmented unknown ``lam`` with weights ``gamma = h^2`` and ``alpha = |Omega|``
gives the pressure equation

    (-D A^-1 G + gamma gamma^T / alpha) p = g - D A^-1 f,

whose operator is symmetric positive definite; ``lam = gamma^T p / alpha``
is the mean of p.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
import scipy.fft as sfft
import scipy.linalg

from . import _kernels
from .errors import SolverFailure
from .grid import Field, GridFamily, StaggeredGrid, apply_ghost_closure


def n_threads() -> int:
    try:
        return max(1, int(os.environ.get("STOKES_MAC_THREADS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# Poisson


def _eigs(m: int, n: int, h: float) -> np.ndarray:
    k = np.arange(1, m + 1)
    return (2.0 - 2.0 * np.cos(k * np.pi / n)) / (h * h)


class PoissonSolver:
    """-Delta_h u = f on the unknown block of one velocity family.

    Node-Dirichlet axis: DST-I, eigenvectors sin(k pi i / N).
    Ghost-reflected axis: DST-II, eigenvectors sin(k pi (j - 1/2) / N).
    """

    def __init__(self, grid: StaggeredGrid, family: GridFamily):
        if not family.has_ghosts:
            raise ValueError("Poisson solves are defined on VEDGE/HEDGE")
        self.grid, self.family = grid, family
        n, h = grid.n, grid.h
        node, ghost = _eigs(n - 1, n, h), _eigs(n, n, h)
        if family is GridFamily.VEDGE:
            self.types = (1, 2)
            lam = node[:, None] + ghost[None, :]
        else:
            self.types = (2, 1)
            lam = ghost[:, None] + node[None, :]
        self.inv_lam = 1.0 / lam
        self.workers = n_threads()

    def solve_block(self, rhs: np.ndarray) -> np.ndarray:
        t0, t1 = self.types
        w = self.workers
        c = sfft.dst(rhs, type=t0, axis=0, norm="ortho", workers=w)
        c = sfft.dst(c, type=t1, axis=1, norm="ortho", workers=w)
        c *= self.inv_lam
        c = sfft.idst(c, type=t1, axis=1, norm="ortho", workers=w)
        return sfft.idst(c, type=t0, axis=0, norm="ortho", workers=w)

    def apply_block(self, u: np.ndarray) -> np.ndarray:
        """-Delta_h with homogeneous closure, on the unknown block."""
        return _kernels.neg_laplacian(embed_homogeneous(u, self.family), 1.0 / self.grid.h**2)


class DensePoissonSolver(PoissonSolver):
    """Same operator assembled column by column and factorised; N <= 16."""

    MAX_N = 16

    def __init__(self, grid: StaggeredGrid, family: GridFamily):
        super().__init__(grid, family)
        if grid.n > self.MAX_N:
            raise ValueError(f"dense Poisson solver limited to N <= {self.MAX_N}")
        shape = family.shape(grid.n)
        blk = family.unknowns(grid.n)
        self.block_shape = np.zeros(shape)[blk].shape
        m = int(np.prod(self.block_shape))
        A = np.empty((m, m))
        e = np.zeros(m)
        for k in range(m):
            e[k] = 1.0
            A[:, k] = self.apply_block(e.reshape(self.block_shape)).ravel()
            e[k] = 0.0
        self.matrix = A
        self._lu = scipy.linalg.lu_factor(A)

    def solve_block(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve(self._lu, rhs.ravel()).reshape(self.block_shape)


def embed_homogeneous(block: np.ndarray, family: GridFamily) -> np.ndarray:
    """Unknown block -> full array with zero walls and anti-reflected ghosts."""
    if family is GridFamily.VEDGE:
        m, n = block.shape  # (N-1, N)
        full = np.zeros((m + 2, n + 2))
        full[1:-1, 1:-1] = block
        full[1:-1, 0] = -block[:, 0]
        full[1:-1, -1] = -block[:, -1]
    else:
        n, m = block.shape  # (N, N-1)
        full = np.zeros((n + 2, m + 2))
        full[1:-1, 1:-1] = block
        full[0, 1:-1] = -block[0, :]
        full[-1, 1:-1] = -block[-1, :]
    return full


def poisson_solve(rhs: Field, trace: Callable | None = None) -> Field:
    """Solve -Delta_h u = rhs on a velocity family with a Dirichlet trace."""
    grid, fam = rhs.grid, rhs.family
    blk = fam.unknowns(grid.n)
    lift = boundary_lift(grid, fam, trace)
    u = PoissonSolver(grid, fam).solve_block(rhs.values[blk] - lift)
    full = np.zeros(fam.shape(grid.n))
    full[blk] = u
    return apply_ghost_closure(Field(grid, fam, full, closed=False), trace)


def boundary_extension(grid: StaggeredGrid, family: GridFamily, trace: Callable | None) -> np.ndarray:
    """Full array with zero unknowns and the trace-driven wall/ghost values."""
    zero = Field(grid, family, np.zeros(family.shape(grid.n)), closed=False)
    return apply_ghost_closure(zero, trace).values


def boundary_lift(grid: StaggeredGrid, family: GridFamily, trace: Callable | None) -> np.ndarray:
    """-Delta_h of the boundary extension, on the unknown block."""
    if trace is None:
        return 0.0
    ext = boundary_extension(grid, family, trace)
    return _kernels.neg_laplacian(ext, 1.0 / grid.h**2)


# --------------------------------------------------------------------------
# Schur complement


@dataclass
class AugmentedSystem:
    """Corrected RHS, boundary trace and the pressure-pinning data."""

    grid: StaggeredGrid
    f1: np.ndarray  # VEDGE full array
    f2: np.ndarray  # HEDGE full array
    g: np.ndarray  # CELL array
    trace: tuple = (None, None)
    alpha: float | None = None
    gamma: np.ndarray | None = None
    method: str = "fft"  # or "dense" for N <= 16

    def __post_init__(self):
        n = self.grid.n
        if self.alpha is None:
            self.alpha = self.grid.area
        if self.gamma is None:
            self.gamma = np.full((n, n), self.grid.h**2)
        cls = {"fft": PoissonSolver, "dense": DensePoissonSolver}[self.method]
        self._p1 = cls(self.grid, GridFamily.VEDGE)
        self._p2 = cls(self.grid, GridFamily.HEDGE)

    def boundary_flux(self) -> float:
        """Discrete outflow of the trace through the walls (should vanish)."""
        e1 = boundary_extension(self.grid, GridFamily.VEDGE, self.trace[0])
        e2 = boundary_extension(self.grid, GridFamily.HEDGE, self.trace[1])
        d = _kernels.divergence(e1[:, 1:-1], e2[1:-1, :], 1.0 / self.grid.h)
        return float(self.grid.h**2 * d.sum())

    def poisson_pair(self, r1: np.ndarray, r2: np.ndarray):
        if n_threads() > 1:
            with ThreadPoolExecutor(2) as ex:
                a = ex.submit(self._p1.solve_block, r1)
                b = ex.submit(self._p2.solve_block, r2)
                return a.result(), b.result()
        return self._p1.solve_block(r1), self._p2.solve_block(r2)

    def div_blocks(self, w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
        """D of homogeneous velocity blocks (zero wall values)."""
        n = self.grid.n
        u1 = np.zeros((n + 1, n))
        u1[1:-1] = w1
        u2 = np.zeros((n, n + 1))
        u2[:, 1:-1] = w2
        return _kernels.divergence(u1, u2, 1.0 / self.grid.h)

    def schur_apply(self, p: np.ndarray) -> np.ndarray:
        gx, gy = _kernels.gradient(p, 1.0 / self.grid.h)
        w1, w2 = self.poisson_pair(gx, gy)
        pin = self.gamma * (np.sum(self.gamma * p) / self.alpha)
        return -self.div_blocks(w1, w2) + pin

    def reduced_rhs(self):
        grid = self.grid
        b1 = GridFamily.VEDGE.unknowns(grid.n)
        b2 = GridFamily.HEDGE.unknowns(grid.n)
        F1 = self.f1[b1] - boundary_lift(grid, GridFamily.VEDGE, self.trace[0])
        F2 = self.f2[b2] - boundary_lift(grid, GridFamily.HEDGE, self.trace[1])
        e1 = boundary_extension(grid, GridFamily.VEDGE, self.trace[0])
        e2 = boundary_extension(grid, GridFamily.HEDGE, self.trace[1])
        De = _kernels.divergence(e1[:, 1:-1], e2[1:-1, :], 1.0 / grid.h)
        return F1, F2, self.g - De


def schur_apply(p: Field, sys: AugmentedSystem) -> Field:
    return Field(p.grid, GridFamily.CELL, sys.schur_apply(p.values))


# --------------------------------------------------------------------------
# outer CG


@dataclass
class SolverStats:
    iterations: int
    residual_history: list = dc_field(default_factory=list)
    tol: float = 0.0
    momentum_residual: float = 0.0
    divergence_residual: float = 0.0
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_relative_residual": self.residual_history[-1] if self.residual_history else 0.0,
            "tol": self.tol,
            "momentum_residual": self.momentum_residual,
            "divergence_residual": self.divergence_residual,
            "seconds": self.seconds,
        }


@dataclass
class StokesFields:
    u1: Field
    u2: Field
    p: Field
    lam: float
    stats: SolverStats


def default_tol(h: float) -> float:
    return max(1e-11, 1e-2 * h**4)


def conjugate_gradient(apply, b, tol, maxiter, precond=None):
    """Plain CG from a zero guess; returns (x, relative residual history)."""
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x, [0.0]
    r = b.copy()
    z = r if precond is None else precond(r)
    d = z.copy()
    rz = np.vdot(r, z)
    hist = [1.0]
    for _ in range(maxiter):
        Ad = apply(d)
        step = rz / np.vdot(d, Ad)
        x += step * d
        r -= step * Ad
        rel = np.linalg.norm(r) / bnorm
        hist.append(float(rel))
        if rel <= tol:
            return x, hist
        z = r if precond is None else precond(r)
        rz_new = np.vdot(r, z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise SolverFailure(f"CG stalled at relative residual {hist[-1]:.3e} after {maxiter} iterations", hist)


def solve_stokes(sys: AugmentedSystem, tol: float | None = None, maxiter: int | None = None, precond=None) -> StokesFields:
    """Pressure by CG on the Schur complement, then two Poisson solves for u."""
    t_start = time.perf_counter()
    grid = sys.grid
    n, h = grid.n, grid.h
    tol = default_tol(h) if tol is None else tol
    maxiter = 10 * n if maxiter is None else maxiter
    F1, F2, G = sys.reduced_rhs()
    w1, w2 = sys.poisson_pair(F1, F2)
    b = G - sys.div_blocks(w1, w2)
    p, hist = conjugate_gradient(sys.schur_apply, b, tol, maxiter, precond)
    lam = float(np.sum(sys.gamma * p) / sys.alpha)
    gx, gy = _kernels.gradient(p, 1.0 / h)
    u1b, u2b = sys.poisson_pair(F1 - gx, F2 - gy)

    # residuals of the full discrete system
    mom1 = PoissonSolver(grid, GridFamily.VEDGE).apply_block(u1b) + gx - F1
    mom2 = PoissonSolver(grid, GridFamily.HEDGE).apply_block(u2b) + gy - F2
    div = sys.div_blocks(u1b, u2b) + sys.gamma * lam - G
    stats = SolverStats(
        iterations=len(hist) - 1,
        residual_history=hist,
        tol=tol,
        momentum_residual=float(max(np.abs(mom1).max(), np.abs(mom2).max())),
        divergence_residual=float(np.sqrt(h * h * np.sum(div * div))),
    )

    u1 = np.zeros(GridFamily.VEDGE.shape(n))
    u1[GridFamily.VEDGE.unknowns(n)] = u1b
    u2 = np.zeros(GridFamily.HEDGE.shape(n))
    u2[GridFamily.HEDGE.unknowns(n)] = u2b
    f1 = apply_ghost_closure(Field(grid, GridFamily.VEDGE, u1, closed=False), sys.trace[0])
    f2 = apply_ghost_closure(Field(grid, GridFamily.HEDGE, u2, closed=False), sys.trace[1])
    stats.seconds = time.perf_counter() - t_start
    return StokesFields(f1, f2, Field(grid, GridFamily.CELL, p), lam, stats)
