"""Property checks runnable from an installed package (``stokes-mac verify``).

Each check returns ``(name, passed, detail)``.  The test suite covers the
same ground with independent oracles; these are the quick field checks.
"""
from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .grid import Field, GridFamily, StaggeredGrid, apply_ghost_closure, diff_backward, diff_forward, inner_product, laplacian
from .jumps import jumps_at
from .pipeline import solve_problem
from .problems import example1, example2, smooth
from .solver import AugmentedSystem, DensePoissonSolver, PoissonSolver


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def random_closed(grid, family, rng):
    f = Field(grid, family, rng.standard_normal(family.shape(grid.n)), closed=False)
    return apply_ghost_closure(f)


def green_identities(ns=(4, 8), seed=0) -> float:
    """Worst relative defect of the four summation-by-parts identities."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in ns:
        g = StaggeredGrid(n, (0.0, 0.0), (1.0, 1.0))
        p = Field(g, GridFamily.CELL, rng.standard_normal((n, n)))
        for fam, axis, space in ((GridFamily.VEDGE, "x", "W1"), (GridFamily.HEDGE, "y", "W2")):
            u, w = random_closed(g, fam, rng), random_closed(g, fam, rng)
            lhs = inner_product(diff_forward(p, axis), u)
            rhs = -inner_product(p, diff_backward(u, axis))
            worst = max(worst, _rel(lhs, rhs))
            other = "y" if axis == "x" else "x"
            lap = Field(g, fam, -laplacian(u).values)
            a = inner_product(lap, w)
            m_axis = axis
            b = inner_product(diff_backward(u, m_axis), diff_backward(w, m_axis)) + inner_product(
                diff_backward(u, other), diff_backward(w, other), space
            )
            worst = max(worst, _rel(a, b))
    return worst


def fft_vs_dense(n=8, count=20, seed=1) -> float:
    rng = np.random.default_rng(seed)
    g = StaggeredGrid(n, (0.0, 0.0), (1.0, 1.0))
    worst = 0.0
    for fam in (GridFamily.VEDGE, GridFamily.HEDGE):
        fast, dense = PoissonSolver(g, fam), DensePoissonSolver(g, fam)
        for _ in range(count):
            r = rng.standard_normal(dense.block_shape)
            a, b = fast.solve_block(r), dense.solve_block(r)
            worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(b))
    return worst


def schur_properties(n=8, count=50, seed=2) -> tuple[float, float]:
    """(symmetry defect, smallest Rayleigh quotient) of the Schur operator."""
    rng = np.random.default_rng(seed)
    g = StaggeredGrid(n, (0.0, 0.0), (1.0, 1.0))
    z = np.zeros
    sys = AugmentedSystem(g, z(GridFamily.VEDGE.shape(n)), z(GridFamily.HEDGE.shape(n)), z((n, n)))
    sym, ray = 0.0, math.inf
    for _ in range(count):
        p, q = rng.standard_normal((n, n)), rng.standard_normal((n, n))
        sp, sq = sys.schur_apply(p), sys.schur_apply(q)
        sym = max(sym, _rel(np.vdot(q, sp), np.vdot(p, sq)))
        ray = min(ray, np.vdot(p, sp) / np.vdot(p, p))
    return sym, ray


def jump_accuracy(points=64) -> float:
    worst = 0.0
    for spec in (example1(), example2()):
        t = np.linspace(0.0, spec.curve.period, points, endpoint=False)
        js = jumps_at(t, spec.curve, spec.interface_data)
        px, py = spec.curve.point(t)
        one = np.ones(points, dtype=np.int8)
        for q, names in (("u1", ("u1x", "u1y", None, None, None)), ("u2", ("u2x", "u2y", None, None, None))):
            fld = getattr(spec.exact, q)
            a, b = fld.jet(px, py, one), fld.jet(px, py, -one)
            for k, key in enumerate(("x", "y", "xx", "xy", "yy")):
                worst = max(worst, float(np.abs(getattr(js, q + key) - (a[k + 1] - b[k + 1])).max()))
        a, b = spec.exact.p.jet(px, py, one), spec.exact.p.jet(px, py, -one)
        for k, key in enumerate(("p", "px", "py")):
            worst = max(worst, float(np.abs(getattr(js, key) - (a[k] - b[k])).max()))
    return worst


def degeneration(n=32) -> bool:
    a = solve_problem(smooth(False), n)
    b = solve_problem(smooth(True), n)
    return all(
        np.array_equal(getattr(a.fields, k).values, getattr(b.fields, k).values) for k in ("u1", "u2", "p")
    )


def kernels_agree(n=16, seed=3) -> float:
    rng = np.random.default_rng(seed)
    if not _kernels.numba_enabled():
        return 0.0
    full = rng.standard_normal((n + 1, n + 2))
    u1, u2, p = rng.standard_normal((n + 1, n)), rng.standard_normal((n, n + 1)), rng.standard_normal((n, n))
    d = np.abs(_kernels.neg_laplacian_np(full, 3.0) - _kernels.neg_laplacian_nb(full, 3.0)).max()
    d = max(d, np.abs(_kernels.divergence_np(u1, u2, 2.0) - _kernels.divergence_nb(u1, u2, 2.0)).max())
    for x, y in zip(_kernels.gradient_np(p, 2.0), _kernels.gradient_nb(p, 2.0)):
        d = max(d, np.abs(x - y).max())
    return float(d)


def smooth_orders(levels=(32, 64, 128)) -> list[float]:
    from .pipeline import solution_errors

    spec = smooth()
    errs = [solution_errors(spec, solve_problem(spec, n)).scaled.l2_u for n in levels]
    return [math.log2(a / b) for a, b in zip(errs, errs[1:])]


def run_all(quick: bool = False) -> list[tuple[str, bool, str]]:
    out = []
    g = green_identities()
    out.append(("green identities", g <= 1e-12, f"max relative defect {g:.2e}"))
    f = fft_vs_dense()
    out.append(("fft vs dense Poisson", f <= 1e-11, f"max relative difference {f:.2e}"))
    sym, ray = schur_properties()
    out.append(("schur symmetric positive", sym <= 1e-11 and ray > 0, f"symmetry {sym:.2e}, min Rayleigh {ray:.3e}"))
    j = jump_accuracy()
    out.append(("jumps vs exact fields", j <= 1e-8, f"max abs difference {j:.2e}"))
    k = kernels_agree()
    out.append(("numba kernels match numpy", k <= 1e-12, f"max difference {k:.2e}"))
    d = degeneration()
    out.append(("zero jumps give plain MAC", d, "bitwise equal" if d else "outputs differ"))
    if not quick:
        o = smooth_orders()
        out.append(("smooth problem second order", all(abs(v - 2) <= 0.2 for v in o), "orders " + ", ".join(f"{v:.2f}" for v in o)))
    return out
