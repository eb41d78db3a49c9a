"""Interface correction terms and the corrected right-hand side.

Every discrete equation is ``sum_k w_k q_k = rhs`` over stencil points k.
When the arm from the equation node c to a stencil point k is cut by the
interface at x*, the value q_k belongs to the other side, and Taylor
expansion of the jump about x* gives

    rhs += -side(c) * w_k * J,    J = [[q]] + d [[q_a]] + d^2/2 [[q_aa]],

with ``d = x_k - x*`` along the arm's axis ``a``.  The pressure series stops
after the linear term.  Mapping of the individual cases onto (w_k, d):

=====================  ====================  ===========  ============
equation               far point k           w_k          series
=====================  ====================  ===========  ============
u1 momentum at x_i     u1 at x_{i+-1}         -1/h^2       3 terms
u1 momentum at x_i     p at x_{i+-1/2}        +-1/h        2 terms
divergence at x_i-1/2  u1 at x_i / x_{i-1}    +1/h / -1/h  3 terms
(and the same in y for u2 / p_y / u2_y)
=====================  ====================  ===========  ============

Crossings are searched on four families of grid lines:

* ``hx``: rows y_{j-1/2}, points every h/2 (u1 nodes alternate with cells);
* ``vy``: columns x_{i-1/2}, points every h/2 (u2 nodes alternate with cells);
* ``u2x``: rows y_j through u2 nodes, arms of length h;
* ``u1y``: columns x_i through u1 nodes, arms of length h.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GeometryError, GridTooCoarseError
from .geometry import CrossingArray, InterfaceCurve, find_crossings
from .grid import Field, GridFamily, StaggeredGrid
from .jumps import JumpSet, JumpTable

SNAP = 1e-10


def _series(jumps: JumpSet, quantity: str, axis: str, offset: float, terms: int) -> float:
    a = axis
    val = getattr(jumps, quantity) if quantity in ("u1", "u2", "p") else 0.0
    val = float(val) + offset * float(getattr(jumps, quantity + a))
    if terms >= 3:
        val += 0.5 * offset * offset * float(getattr(jumps, quantity + a + a))
    return val


def _check_offset(offset: float, limit: float) -> float:
    if abs(offset) > limit * (1.0 + 1e-9):
        raise GeometryError(f"offset {offset:.6g} exceeds arm length {limit:.6g}")
    if abs(offset) < SNAP * limit:
        return 0.0
    return offset


def laplacian_correction(jumps: JumpSet, center_side: int, component: str, axis: str, offset: float, h: float) -> float:
    """Correction to -Delta_h of u1/u2 for one cut arm of length h.

    ``offset`` is far-neighbour coordinate minus crossing coordinate.  Equals
    +J/h^2 for a centre in Omega+, -J/h^2 in Omega-.
    """
    offset = _check_offset(offset, h)
    return center_side * _series(jumps, component, axis, offset, 3) / (h * h)


def gradient_correction(
    jumps: JumpSet, center_side: int, quantity: str, offset: float, h: float, direction: int
) -> float:
    """Correction for a first-difference arm of length h/2.

    ``quantity`` is one of p_x, p_y (pressure gradient in a momentum
    equation) or u1_x, u2_y (velocity divergence).  ``direction`` is +1 when
    the far point is the forward point of the difference, -1 otherwise.
    """
    offset = _check_offset(offset, 0.5 * h)
    name, axis = quantity.split("_")
    terms = 2 if name == "p" else 3
    return -center_side * direction * _series(jumps, name, axis, offset, terms) / h


# --------------------------------------------------------------------------
# crossings on the grid lines


@dataclass
class GridCrossings:
    """All cut segments of a grid, concatenated in a fixed order.

    ``kind[k]`` names the line family, ``line[k]`` the line index and
    ``seg[k]`` the segment index along that line (start point index).
    """

    crossings: CrossingArray
    kind: np.ndarray
    line: np.ndarray
    seg: np.ndarray

    def __len__(self):
        return len(self.crossings)


KINDS = ("hx", "vy", "u2x", "u1y")


def _line_points(grid: StaggeredGrid, kind: str):
    """(coordinate along line, fixed coordinate, is_horizontal) per family."""
    n, h = grid.n, grid.h
    x0, y0 = grid.origin
    if kind == "hx":
        along = x0 + np.arange(2 * n + 1) * (h / 2)
        fixed = y0 + (np.arange(1, n + 1) - 0.5) * h
        return along, fixed, True
    if kind == "vy":
        along = y0 + np.arange(2 * n + 1) * (h / 2)
        fixed = x0 + (np.arange(1, n + 1) - 0.5) * h
        return along, fixed, False
    if kind == "u2x":
        along = x0 + (np.arange(n + 2) - 0.5) * h
        fixed = y0 + np.arange(1, n) * h
        return along, fixed, True
    if kind == "u1y":
        along = y0 + (np.arange(n + 2) - 0.5) * h
        fixed = x0 + np.arange(1, n) * h
        return along, fixed, False
    raise ValueError(kind)


def grid_crossings(grid: StaggeredGrid, curve: InterfaceCurve | None) -> GridCrossings:
    parts, kinds, lines, segs = [], [], [], []
    for code, kind in enumerate(KINDS):
        along, fixed, horizontal = _line_points(grid, kind)
        L, S = np.meshgrid(np.arange(len(fixed)), np.arange(len(along) - 1), indexing="ij")
        a0 = along[S]
        a1 = along[S + 1]
        f = fixed[L]
        if horizontal:
            xa, ya, xb, yb = a0, f, a1, f
        else:
            xa, ya, xb, yb = f, a0, f, a1
        if curve is None:
            cut = np.zeros(L.size, dtype=bool)
            arr = CrossingArray(*(np.empty(0) for _ in range(7)), np.empty(0, dtype=np.int8))
        else:
            cut, arr = find_crossings(curve, xa, ya, xb, yb, h=grid.h)
        if kind in ("hx", "vy") and cut.size:
            pair = cut.reshape(L.shape)
            # a full velocity arm is two consecutive half segments starting at a node
            if np.any(pair[:, 0::2] & pair[:, 1::2]):
                raise GridTooCoarseError(f"N={grid.n}: an arm of length h is cut twice ({kind})")
        parts.append(arr)
        kinds.append(np.full(len(arr), code, dtype=np.int8))
        lines.append(L.ravel()[cut])
        segs.append(S.ravel()[cut])
    cat = CrossingArray(*(np.concatenate([getattr(p, f) for p in parts]) for f in
                          ("xa", "ya", "xb", "yb", "x", "y", "s", "side_a")))
    return GridCrossings(cat, np.concatenate(kinds), np.concatenate(lines), np.concatenate(segs))


# --------------------------------------------------------------------------
# correction field


@dataclass
class CorrectionField:
    """Sparse accumulated corrections keyed by (family, i, j) array index."""

    entries: dict = dc_field(default_factory=dict)
    provenance: dict = dc_field(default_factory=dict)

    def add(self, family: GridFamily, i: int, j: int, value: float, source: int | None = None):
        if value == 0.0:
            return
        key = (family, int(i), int(j))
        self.entries[key] = self.entries.get(key, 0.0) + value
        if source is not None:
            self.provenance.setdefault(key, []).append(source)

    def __len__(self):
        return len(self.entries)

    def dense(self, grid: StaggeredGrid, family: GridFamily) -> np.ndarray:
        out = np.zeros(family.shape(grid.n))
        for (fam, i, j), v in self.entries.items():
            if fam is family:
                out[i, j] += v
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["family", "i", "j", "value"])
            for (fam, i, j), v in self.entries.items():
                w.writerow([fam.name, i, j, f"{v:.17e}"])


def build_corrections(grid: StaggeredGrid, gc: GridCrossings, table: JumpTable) -> CorrectionField:
    """Dispatch each cut segment to the equations whose stencils it cuts."""
    if len(table) != len(gc):
        raise GeometryError("jump table does not cover every crossing")
    n, h = grid.n, grid.h
    x0, y0 = grid.origin
    cf = CorrectionField()
    cr = gc.crossings
    J = table.jumps
    cols = {k: np.atleast_1d(v) for k, v in J.as_dict().items()}

    def jumps_at(k):
        return JumpSet(**{name: (arr[k] if arr.size == len(gc) else arr[0]) for name, arr in cols.items()})

    for k in range(len(gc)):
        kind = KINDS[gc.kind[k]]
        line, seg = int(gc.line[k]), int(gc.seg[k])
        js = jumps_at(k)
        xs, ys = cr.x[k], cr.y[k]
        s_start = int(cr.side_a[k])
        s_end = -s_start
        if kind in ("hx", "vy"):
            horizontal = kind == "hx"
            comp, fam = ("u1", GridFamily.VEDGE) if horizontal else ("u2", GridFamily.HEDGE)
            axis = "x" if horizontal else "y"
            star = xs if horizontal else ys
            origin = x0 if horizontal else y0
            # point index q along the line sits at origin + q h/2; even = velocity node
            q_node = seg if seg % 2 == 0 else seg + 1
            q_cell = seg + 1 if seg % 2 == 0 else seg
            node_side = s_start if q_node == seg else s_end
            cell_side = -node_side
            pos_node = origin + q_node * h / 2
            pos_cell = origin + q_cell * h / 2
            m = q_node // 2  # velocity index along the axis
            c = (q_cell + 1) // 2 - 1  # cell array index along the axis
            other = line + 1  # u1 row j / u2 column i of this line
            cell_key = (c, line) if horizontal else (line, c)
            node_key = (m, other) if horizontal else (other, m)
            # divergence at the cell, far point the velocity node
            dirn = 1 if pos_node > pos_cell else -1
            cf.add(GridFamily.CELL, *cell_key,
                   gradient_correction(js, cell_side, f"{comp}_{axis}", pos_node - star, h, dirn), k)
            if 1 <= m <= n - 1:
                # pressure gradient in the momentum equation, far point the cell
                dirn = 1 if pos_cell > pos_node else -1
                cf.add(fam, *node_key,
                       gradient_correction(js, node_side, f"p_{axis}", pos_cell - star, h, dirn), k)
            # full velocity arm through this cell
            q_far = q_node + 2 * (q_cell - q_node)
            m_far = q_far // 2
            pos_far = origin + q_far * h / 2
            far_key = (m_far, other) if horizontal else (other, m_far)
            if 1 <= m <= n - 1:
                cf.add(fam, *node_key, laplacian_correction(js, node_side, comp, axis, pos_far - star, h), k)
            if 1 <= m_far <= n - 1:
                cf.add(fam, *far_key, laplacian_correction(js, cell_side, comp, axis, pos_node - star, h), k)
        else:
            horizontal = kind == "u2x"
            comp, fam = ("u2", GridFamily.HEDGE) if horizontal else ("u1", GridFamily.VEDGE)
            axis = "x" if horizontal else "y"
            star = xs if horizontal else ys
            origin = x0 if horizontal else y0
            pos_a = origin + (seg - 0.5) * h
            pos_b = pos_a + h
            other = line + 1
            for idx, sd, far in ((seg, s_start, pos_b), (seg + 1, s_end, pos_a)):
                if 1 <= idx <= n:
                    key = (idx, other) if horizontal else (other, idx)
                    cf.add(fam, *key, laplacian_correction(js, sd, comp, axis, far - star, h), k)
    return cf


# --------------------------------------------------------------------------
# corrected right-hand side


@dataclass
class CorrectedRHS:
    f1: Field
    f2: Field
    g: Field
    corrections: CorrectionField


def sample_forcing(grid: StaggeredGrid, forcing_at) -> tuple[Field, Field]:
    X1, Y1 = grid.coords(GridFamily.VEDGE)
    X2, Y2 = grid.coords(GridFamily.HEDGE)
    f1 = forcing_at(X1, Y1)[0]
    f2 = forcing_at(X2, Y2)[1]
    return Field(grid, GridFamily.VEDGE, f1), Field(grid, GridFamily.HEDGE, f2)


def assemble_rhs(grid: StaggeredGrid, forcing_at, gc: GridCrossings | None, table: JumpTable | None) -> CorrectedRHS:
    """Sampled forcing plus interface corrections on (V1, V2, M).

    ``forcing_at(x, y)`` returns ``(f1, f2)`` with each point's own side.
    Boundary data are not folded in here.
    """
    f1, f2 = sample_forcing(grid, forcing_at)
    cf = CorrectionField() if gc is None or len(gc) == 0 else build_corrections(grid, gc, table)
    g = np.zeros(GridFamily.CELL.shape(grid.n))
    if len(cf):
        f1 = Field(grid, f1.family, f1.values + cf.dense(grid, GridFamily.VEDGE))
        f2 = Field(grid, f2.family, f2.values + cf.dense(grid, GridFamily.HEDGE))
        g = g + cf.dense(grid, GridFamily.CELL)
    return CorrectedRHS(f1, f2, Field(grid, GridFamily.CELL, g), cf)
