import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import corrections_for, extension_correction
from stokes_mac.corrections import (
    assemble_rhs,
    build_corrections,
    gradient_correction,
    grid_crossings,
    laplacian_correction,
    sample_forcing,
)
from stokes_mac.errors import GeometryError, GridTooCoarseError
from stokes_mac.geometry import Ellipse, NodeClass, classify_nodes
from stokes_mac.grid import GridFamily, StaggeredGrid
from stokes_mac.jumps import FIRST_ORDER, SECOND_ORDER, JumpSet, jump_table
from stokes_mac.problems import example1, example2, smooth


def jumps(**kw):
    vals = {k: 0.0 for k in FIRST_ORDER + SECOND_ORDER}
    vals.update(kw)
    return JumpSet(**vals)


# --- formula evaluation ---------------------------------------------------


def test_zero_jumps_give_zero_corrections():
    z = jumps()
    assert laplacian_correction(z, 1, "u1", "x", 0.3, 1.0) == 0.0
    for q in ("p_x", "p_y", "u1_x", "u2_y"):
        assert gradient_correction(z, -1, q, 0.2, 1.0, 1) == 0.0


def test_constant_velocity_jump_gives_inverse_h_squared():
    # only the constant term survives
    h = 0.25
    js = jumps(u1=1.0)
    for off in (-h, -0.1, 0.0, 0.2):
        assert laplacian_correction(js, 1, "u1", "x", off, h) == pytest.approx(1 / h**2)


def test_pressure_jump_correction_value():
    h = 4.0 / 128
    js = jumps(p=-5.0)
    # centre in Omega+, far neighbour forward across the crossing
    assert gradient_correction(js, 1, "p_x", 0.3 * h, h, 1) == pytest.approx(5 / h)


def test_pressure_series_has_two_terms():
    h = 0.1
    js = jumps(p=2.0, px=3.0, u1xx=7.0)
    assert gradient_correction(js, 1, "p_x", 0.04, h, 1) == pytest.approx(-(2.0 + 0.04 * 3.0) / h)


def test_velocity_divergence_series_has_three_terms():
    h, a, b, xi = 0.1, 1.5, -4.0, -0.03
    js = jumps(u1x=a, u1xx=b)
    expect = (xi / h) * a + 0.5 * (xi * xi / h) * b
    assert gradient_correction(js, 1, "u1_x", xi, h, -1) == pytest.approx(expect)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10), st.floats(-1, 1), st.sampled_from(["x", "y"]),
)
def test_corrections_flip_with_centre_side(j0, j1, j2, frac, axis):
    h = 0.05
    js = jumps(**{"u2" + axis: j1, "u2" + axis * 2: j2, "p": j0, "p" + axis: j1})
    off = frac * h
    assert laplacian_correction(js, 1, "u2", axis, off, h) == -laplacian_correction(js, -1, "u2", axis, off, h)
    q = "p_" + axis
    assert gradient_correction(js, 1, q, off / 2, h, 1) == -gradient_correction(js, -1, q, off / 2, h, 1)


def test_offset_longer_than_arm_rejected():
    with pytest.raises(GeometryError):
        laplacian_correction(jumps(), 1, "u1", "x", 1.01, 1.0)
    with pytest.raises(GeometryError):
        gradient_correction(jumps(), 1, "p_x", 0.6, 1.0, 1)


# --- assembled field against the extension oracle -------------------------


@pytest.mark.parametrize("make", [example1, example2], ids=["example1", "example2"])
@pytest.mark.parametrize("n", [64, 128])
def test_momentum_corrections_match_extension_oracle(make, n):
    spec = make()
    grid, cf = corrections_for(spec, n)
    worst = 0.0
    for (fam, i, j), v in cf.entries.items():
        if fam is GridFamily.CELL:
            continue
        worst = max(worst, abs(v - extension_correction(spec, grid, fam, i, j)))
    # Taylor remainders: h^3/h^2 for the Laplacian, h^2/h for the pressure
    assert worst <= 2 * grid.h


def test_node_nearest_east_point_matches_oracle():
    spec = example1()
    grid, cf = corrections_for(spec, 128)
    X, Y = grid.coords(GridFamily.VEDGE)
    keys = [k for k in cf.entries if k[0] is GridFamily.VEDGE]
    i, j = min(((k[1], k[2]) for k in keys), key=lambda ij: np.hypot(X[ij] - 1.0, Y[ij]))
    v = cf.entries[(GridFamily.VEDGE, i, j)]
    ref = extension_correction(spec, grid, GridFamily.VEDGE, i, j)
    # the jump [[p]] = 5 dominates: both are of size 5/h
    assert abs(ref) > 100
    assert abs(v - ref) <= grid.h


def test_corrections_only_at_irregular_nodes():
    spec = example2()
    grid, cf = corrections_for(spec, 64)
    labels = {fam: classify_nodes(grid, spec.curve, fam) for fam in (GridFamily.VEDGE, GridFamily.HEDGE, GridFamily.CELL)}
    for fam, i, j in cf.entries:
        assert labels[fam][i, j] == NodeClass.IRREGULAR
    assert all(np.isfinite(v) for v in cf.entries.values())


def test_nonzero_divergence_cells_equal_cut_cells():
    spec = example1()
    grid = StaggeredGrid(128, spec.origin, spec.extent)
    gc = grid_crossings(grid, spec.curve)
    rhs = assemble_rhs(grid, spec.f_at, gc, jump_table(spec.curve, spec.interface_data, gc.crossings))
    # geometry oracle: a cell is cut iff a half arm to one of its four faces changes side
    X, Y = grid.coords(GridFamily.CELL)
    inside = spec.curve.classify(X, Y) >= 0
    cut = np.zeros_like(inside)
    for dx, dy in ((0.5, 0), (-0.5, 0), (0, 0.5), (0, -0.5)):
        cut |= (spec.curve.classify(X + dx * grid.h, Y + dy * grid.h) >= 0) != inside
    assert np.count_nonzero(rhs.g.values) == np.count_nonzero(cut)
    assert np.array_equal(rhs.g.values != 0, cut)


def test_no_interface_rhs_is_sampled_forcing():
    spec = smooth()
    grid = StaggeredGrid(16, spec.origin, spec.extent)
    rhs = assemble_rhs(grid, spec.f_at, grid_crossings(grid, None), None)
    f1, f2 = sample_forcing(grid, spec.f_at)
    assert np.array_equal(rhs.f1.values, f1.values)
    assert np.array_equal(rhs.f2.values, f2.values)
    assert not rhs.g.values.any()
    assert len(rhs.corrections) == 0


def test_zero_jump_curve_gives_empty_correction_field():
    spec = smooth(True)
    grid, cf = corrections_for(spec, 32)
    assert len(cf) == 0


def test_missing_jumps_rejected():
    spec = example1()
    grid = StaggeredGrid(16, spec.origin, spec.extent)
    gc = grid_crossings(grid, spec.curve)
    table = jump_table(spec.curve, spec.interface_data, gc.crossings)
    other = grid_crossings(StaggeredGrid(32, spec.origin, spec.extent), spec.curve)
    with pytest.raises(GeometryError):
        build_corrections(grid, other, table)


def test_double_cut_arm_detected():
    grid = StaggeredGrid(8, (0.0, 0.0), (1.0, 1.0))
    # thin ellipse between two u1 nodes on a row: the arm of length h is cut twice
    with pytest.raises(GridTooCoarseError):
        grid_crossings(grid, Ellipse(0.03, 0.3, (0.5 + 0.0625, 0.5)))


def test_csv_dump_round_trip(tmp_path):
    _, cf = corrections_for(example1(), 32)
    path = tmp_path / "corr.csv"
    cf.to_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["family", "i", "j", "value"]
    assert len(rows) == len(cf) + 1
    back = {(GridFamily[r[0]], int(r[1]), int(r[2])): float(r[3]) for r in rows[1:]}
    assert back == cf.entries
