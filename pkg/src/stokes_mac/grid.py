"""Uniform staggered (MAC) grid, difference operators, inner products and norms.

Array layout
------------
Every field is a dense array indexed ``values[a, b]`` with ``a`` along x and
``b`` along y.  Array index ``a`` of family ``F`` sits at
``x = x0 + (a + F.offset[0]) * h`` (same for y), which gives

==========  ==============  ===========  =========================================
family      offset (h)      shape        meaning
==========  ==============  ===========  =========================================
VERTEX      (0, 0)          (N+1, N+1)   cell corners x_i, y_j
CELL        (1/2, 1/2)      (N, N)       pressure, x_{i-1/2}, y_{j-1/2}, i,j=1..N
VEDGE       (0, -1/2)       (N+1, N+2)   u1 at x_i, y_{j-1/2}; j=0, N+1 are ghosts
HEDGE       (-1/2, 0)       (N+2, N+1)   u2 at x_{i-1/2}, y_j; i=0, N+1 are ghosts
==========  ==============  ===========  =========================================

With this layout the half-integer index ``u1[i, j-1/2]`` is ``values[i, j]``.
Forward and backward differences of a staggered field land on the same
physical midpoints, so both are one routine that only differs in name.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import GhostError, InvalidOperandError


class GridFamily(enum.Enum):
    VERTEX = (0.0, 0.0)
    CELL = (0.5, 0.5)
    VEDGE = (0.0, -0.5)
    HEDGE = (-0.5, 0.0)

    @property
    def offset(self) -> tuple[float, float]:
        return self.value

    def shape(self, n: int) -> tuple[int, int]:
        return {
            GridFamily.VERTEX: (n + 1, n + 1),
            GridFamily.CELL: (n, n),
            GridFamily.VEDGE: (n + 1, n + 2),
            GridFamily.HEDGE: (n + 2, n + 1),
        }[self]

    def unknowns(self, n: int) -> tuple[slice, slice]:
        """Index block of the discrete unknowns (the V/M space interior)."""
        return {
            GridFamily.VERTEX: (slice(1, n), slice(1, n)),
            GridFamily.CELL: (slice(0, n), slice(0, n)),
            GridFamily.VEDGE: (slice(1, n), slice(1, n + 1)),
            GridFamily.HEDGE: (slice(1, n + 1), slice(1, n)),
        }[self]

    @property
    def has_ghosts(self) -> bool:
        return self in (GridFamily.VEDGE, GridFamily.HEDGE)


def _family_for_offset(ox: float, oy: float) -> GridFamily:
    key = (ox % 1.0, oy % 1.0)
    for fam in GridFamily:
        if (fam.offset[0] % 1.0, fam.offset[1] % 1.0) == key:
            return fam
    raise InvalidOperandError(f"no grid family at offset {key}")  # pragma: no cover


@dataclass(frozen=True)
class StaggeredGrid:
    """Uniform ``n x n`` partition of the square ``origin + [0, extent]^2``."""

    n: int
    origin: tuple[float, float] = (0.0, 0.0)
    extent: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise ValueError(f"need an integer N >= 4, got {self.n}")
        lx, ly = self.extent
        if lx <= 0 or ly <= 0:
            raise ValueError("extent must be positive")
        if abs(lx - ly) > 1e-12 * max(lx, ly):
            raise ValueError("only square domains are supported (Lx == Ly)")

    @property
    def h(self) -> float:
        return self.extent[0] / self.n

    @property
    def area(self) -> float:
        return self.extent[0] * self.extent[1]

    def axes(self, family: GridFamily) -> tuple[np.ndarray, np.ndarray]:
        nx, ny = family.shape(self.n)
        ox, oy = family.offset
        x = self.origin[0] + (np.arange(nx) + ox) * self.h
        y = self.origin[1] + (np.arange(ny) + oy) * self.h
        return x, y

    def coords(self, family: GridFamily) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.axes(family)
        return np.meshgrid(x, y, indexing="ij")

    def zeros(self, family: GridFamily) -> "Field":
        return Field(self, family, np.zeros(family.shape(self.n)), closed=not family.has_ghosts)

    def sample(self, func: Callable, family: GridFamily) -> "Field":
        """Evaluate ``func(x, y)`` at every stored point, ghosts included."""
        X, Y = self.coords(family)
        vals = np.broadcast_to(np.asarray(func(X, Y), dtype=float), X.shape).copy()
        return Field(self, family, vals, closed=True)


@dataclass
class Field:
    """Grid function on one family.

    ``closed`` records whether boundary and ghost entries hold meaningful
    values; the Laplacian refuses to read them otherwise.
    """

    grid: StaggeredGrid
    family: GridFamily
    values: np.ndarray
    closed: bool = dc_field(default=True)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.family.shape(self.grid.n):
            raise InvalidOperandError(
                f"{self.family.name} field on N={self.grid.n} needs shape "
                f"{self.family.shape(self.grid.n)}, got {self.values.shape}"
            )

    @property
    def interior(self) -> np.ndarray:
        return self.values[self.family.unknowns(self.grid.n)]

    def copy(self) -> "Field":
        return Field(self.grid, self.family, self.values.copy(), self.closed)


# --------------------------------------------------------------------------
# difference operators


def _place(dst: np.ndarray, src: np.ndarray, sx: int, sy: int) -> None:
    """dst[a + sx, b + sy] = src[a, b] wherever both indices are valid."""
    a0, a1 = max(0, -sx), min(src.shape[0], dst.shape[0] - sx)
    b0, b1 = max(0, -sy), min(src.shape[1], dst.shape[1] - sy)
    if a1 <= a0 or b1 <= b0:
        raise InvalidOperandError("difference has no overlap with its target family")
    dst[a0 + sx : a1 + sx, b0 + sy : b1 + sy] = src[a0:a1, b0:b1]


def _axis_index(axis) -> int:
    if axis in (0, "x"):
        return 0
    if axis in (1, "y"):
        return 1
    raise InvalidOperandError(f"axis must be 'x' or 'y', got {axis!r}")


def _diff(field: Field, axis) -> Field:
    ax = _axis_index(axis)
    ox, oy = field.family.offset
    v = field.values
    if ax == 0:
        d = (v[1:, :] - v[:-1, :]) / field.grid.h
        target = _family_for_offset(ox + 0.5, oy)
        sx = round(ox + 0.5 - target.offset[0])
        sy = round(oy - target.offset[1])
    else:
        d = (v[:, 1:] - v[:, :-1]) / field.grid.h
        target = _family_for_offset(ox, oy + 0.5)
        sx = round(ox - target.offset[0])
        sy = round(oy + 0.5 - target.offset[1])
    out = np.zeros(target.shape(field.grid.n))
    _place(out, d, sx, sy)
    return Field(field.grid, target, out, closed=False)


def diff_forward(field: Field, axis) -> Field:
    """h^-1 (v[l+1] - v[l]) placed on the staggered family between the two points.

    Entries of the target family that the difference cannot reach are zero.
    """
    return _diff(field, axis)


def diff_backward(field: Field, axis) -> Field:
    """h^-1 (v[l] - v[l-1]); same physical midpoints as :func:`diff_forward`."""
    return _diff(field, axis)


def laplacian(field: Field) -> Field:
    """Five-point Laplacian at every point with four stored neighbours."""
    if field.family.has_ghosts and not field.closed:
        raise GhostError(
            f"{field.family.name} field has unpopulated ghosts; call apply_ghost_closure"
        )
    out = np.zeros_like(field.values)
    out[1:-1, 1:-1] = -_kernels.neg_laplacian_np(field.values, 1.0 / field.grid.h**2)
    return Field(field.grid, field.family, out, closed=False)


def apply_ghost_closure(field: Field, trace: Callable | None = None) -> Field:
    """Fill boundary nodes and ghosts of a velocity field from a Dirichlet trace.

    On-node boundary entries get the trace itself; a ghost half a cell outside
    the wall gets ``2 g - interior`` so the wall value is the linear average.
    """
    fam = field.family
    if not fam.has_ghosts:
        raise InvalidOperandError("ghost closure applies to VEDGE/HEDGE fields only")
    g = field.grid
    n, x0, y0 = g.n, g.origin[0], g.origin[1]
    x1, y1 = x0 + g.extent[0], y0 + g.extent[1]
    v = field.values.copy()
    x, y = g.axes(fam)

    def tr(xx, yy):
        if trace is None:
            return np.zeros(np.broadcast(xx, yy).shape)
        return np.broadcast_to(np.asarray(trace(xx, yy), dtype=float), np.broadcast(xx, yy).shape)

    if fam is GridFamily.VEDGE:
        ys = y[1 : n + 1]
        v[0, 1 : n + 1] = tr(x0, ys)
        v[n, 1 : n + 1] = tr(x1, ys)
        v[:, 0] = 2.0 * tr(x, y0) - v[:, 1]
        v[:, n + 1] = 2.0 * tr(x, y1) - v[:, n]
    else:
        xs = x[1 : n + 1]
        v[1 : n + 1, 0] = tr(xs, y0)
        v[1 : n + 1, n] = tr(xs, y1)
        v[0, :] = 2.0 * tr(x0, y) - v[1, :]
        v[n + 1, :] = 2.0 * tr(x1, y) - v[n, :]
    return Field(g, fam, v, closed=True)


# --------------------------------------------------------------------------
# inner products and norms

_DEFAULT_SPACE = {
    GridFamily.VEDGE: "V1",
    GridFamily.HEDGE: "V2",
    GridFamily.CELL: "M",
}

_SPACE_FAMILY = {
    "V1": GridFamily.VEDGE,
    "V2": GridFamily.HEDGE,
    "W1": GridFamily.VERTEX,
    "W2": GridFamily.VERTEX,
    "M": GridFamily.CELL,
}


def _weighted_block(values: np.ndarray, space: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Summation block and its weights for one discrete space."""
    if space == "V1":
        return values[1:n, 1 : n + 1], np.ones(1)
    if space == "V2":
        return values[1 : n + 1, 1:n], np.ones(1)
    if space == "M":
        return values, np.ones(1)
    rho = np.ones(n + 1)
    rho[0] = rho[-1] = 0.5
    if space == "W1":
        return values[1:n, :], rho[None, :]
    if space == "W2":
        return values[:, 1:n], rho[:, None]
    raise InvalidOperandError(f"unknown space {space!r}")


def inner_product(a: Field, b: Field, space: str | None = None) -> float:
    """Discrete l2 inner product of two fields on the same family.

    ``space`` is one of V1, V2, W1, W2, M; it defaults from the family except
    for vertex fields, where W1 and W2 differ in their half weights.
    """
    if a.family is not b.family or a.grid.n != b.grid.n:
        raise InvalidOperandError(f"cannot pair {a.family.name} with {b.family.name}")
    if space is None:
        if a.family not in _DEFAULT_SPACE:
            raise InvalidOperandError("vertex fields need space='W1' or 'W2'")
        space = _DEFAULT_SPACE[a.family]
    if _SPACE_FAMILY.get(space) is not a.family:
        raise InvalidOperandError(f"space {space} does not live on {a.family.name}")
    n = a.grid.n
    va, w = _weighted_block(a.values, space, n)
    vb, _ = _weighted_block(b.values, space, n)
    return float(a.grid.h**2 * np.sum(w * va * vb))


def norm(a: Field, space: str | None = None) -> float:
    return float(np.sqrt(inner_product(a, a, space)))


@dataclass(frozen=True)
class ErrorNorms:
    l2_u: float
    l2_p: float
    h1_semi_u: float
    max_u: float
    max_grad_u: float


def gradient_parts(u1: Field, u2: Field) -> list[tuple[Field, str]]:
    """The four backward differences entering |v|_1, each with its space."""
    return [
        (diff_backward(u1, "x"), "M"),
        (diff_backward(u1, "y"), "W1"),
        (diff_backward(u2, "x"), "W2"),
        (diff_backward(u2, "y"), "M"),
    ]


def norms(e_u1: Field, e_u2: Field, e_p: Field) -> ErrorNorms:
    """Unscaled l2, |.|_1, max and max-gradient norms of a velocity/pressure pair.

    The velocity fields must have their ghosts closed; the gradient terms read
    the wall rows.
    """
    if e_u1.family is not GridFamily.VEDGE or e_u2.family is not GridFamily.HEDGE:
        raise InvalidOperandError("norms expects (VEDGE, HEDGE, CELL) fields")
    if e_p.family is not GridFamily.CELL:
        raise InvalidOperandError("norms expects a CELL pressure field")
    n = e_u1.grid.n
    l2_u = np.sqrt(inner_product(e_u1, e_u1) + inner_product(e_u2, e_u2))
    l2_p = norm(e_p)
    parts = gradient_parts(e_u1, e_u2)
    h1 = np.sqrt(sum(inner_product(f, f, s) for f, s in parts))
    max_u = max(np.abs(e_u1.interior).max(), np.abs(e_u2.interior).max())
    gmax = 0.0
    for f, s in parts:
        blk, _ = _weighted_block(f.values, s, n)
        gmax = max(gmax, float(np.abs(blk).max()))
    return ErrorNorms(float(l2_u), float(l2_p), float(h1), float(max_u), gmax)
