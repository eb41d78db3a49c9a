import math

import numpy as np
import pytest

from stokes_mac import harness
from stokes_mac.cli import main
from stokes_mac.errors import SolverFailure
from stokes_mac.grid import GridFamily, StaggeredGrid
from stokes_mac.harness import (
    COLUMNS,
    CSV_HEADER,
    ConvergenceReport,
    Level,
    dump_fields,
    emit,
    parse_csv,
    read_fields,
    run_study,
)
from stokes_mac.pipeline import solve_problem
from stokes_mac.problems import example1
from stokes_mac.solver import SolverStats, StokesFields


def level(n, scale, iters=10):
    return Level(n, {c: scale * (k + 1) for k, c in enumerate(COLUMNS)}, iters, 0.5)


# --- reports and CSV ------------------------------------------------------


def test_csv_header_columns():
    assert CSV_HEADER == ("N", "eu_l2", "order", "ep_l2", "order", "eu_h1", "order", "eu_max", "order",
                          "eu_gradmax", "order", "cg_iters", "seconds")


def test_empty_report_is_header_only():
    assert emit(ConvergenceReport("x"), "csv") == ",".join(CSV_HEADER) + "\n"


def test_single_level_has_empty_orders():
    text = emit(ConvergenceReport("x", [level(32, 1e-3)]), "csv")
    cells = text.splitlines()[1].split(",")
    assert [cells[k] for k in (2, 4, 6, 8, 10)] == [""] * 5


def test_orders_are_log2_ratios():
    rep = ConvergenceReport("x", [level(32, 4e-3), level(64, 1e-3)])
    assert rep.orders()[1]["eu_l2"] == pytest.approx(2.0)


def test_orders_undefined_unless_refined_by_two():
    rep = ConvergenceReport("x", [level(32, 4e-3), level(96, 1e-3)])
    assert all(v is None for v in rep.orders()[1].values())


def test_csv_uses_fixed_format_and_newlines():
    text = emit(ConvergenceReport("x", [level(32, 1.0 / 3)]), "csv")
    assert "\r" not in text
    assert text.splitlines()[1].startswith("32,3.333333e-01,")


def test_timing_can_be_blanked():
    text = emit(ConvergenceReport("x", [level(32, 1e-3)]), "csv", timing=False)
    assert text.splitlines()[1].endswith(",10,")


def test_parse_rejects_foreign_text():
    with pytest.raises(ValueError):
        parse_csv("a,b,c\n1,2,3\n")


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        emit(ConvergenceReport("x"), "json")


def test_table_lists_levels():
    text = emit(ConvergenceReport("demo", [level(32, 4e-3), level(64, 1e-3)]), "table")
    assert text.startswith("# demo")
    assert "2.00" in text


def test_study_csv_round_trip():
    rep = run_study("example1", [32, 64])
    text = emit(rep, "csv")
    back = parse_csv(text, rep.problem)
    assert [lv.n for lv in back.levels] == [32, 64]
    assert [lv.cg_iters for lv in back.levels] == [lv.cg_iters for lv in rep.levels]
    for a, b in zip(rep.levels, back.levels):
        for c in COLUMNS:
            assert b.errors[c] == pytest.approx(a.errors[c], rel=1e-6)
    for a, b in zip(rep.orders()[1:], back.orders()[1:]):
        for c in COLUMNS:
            assert b[c] == pytest.approx(a[c], rel=1e-6)
    assert emit(back, "csv") == text


def test_study_bytes_are_deterministic():
    a = emit(run_study("example2", [16, 32]), "csv", timing=False)
    b = emit(run_study("example2", [16, 32]), "csv", timing=False)
    c = emit(run_study("example2", [16, 32], parallel=True), "csv", timing=False)
    assert a == b == c


def test_errors_finite_and_nonnegative():
    rep = run_study("example1", [16, 32])
    for lv in rep.levels:
        assert all(math.isfinite(v) and v >= 0 for v in lv.errors.values())


def test_failed_level_keeps_partial_report(monkeypatch):
    real = harness.measure

    def flaky(spec, n, tol=None):
        if n == 32:
            raise SolverFailure("stalled", [1.0])
        return real(spec, n, tol)

    monkeypatch.setattr(harness, "measure", flaky)
    rep = run_study("example1", [16, 32, 64])
    assert [lv.n for lv in rep.levels] == [16]
    assert "N=32" in rep.failure


# --- field dumps ----------------------------------------------------------


def zero_fields(n):
    g = StaggeredGrid(n, (-1.0, 0.0), (2.0, 2.0))
    return StokesFields(g.zeros(GridFamily.VEDGE), g.zeros(GridFamily.HEDGE), g.zeros(GridFamily.CELL), 0.0, SolverStats(0))


def test_zero_dump_has_zero_blocks_with_shapes(tmp_path):
    path = tmp_path / "zero.txt"
    dump_fields(zero_fields(8), path)
    back = read_fields(path)
    assert back["u1"].values.shape == (9, 10)
    assert back["u2"].values.shape == (10, 9)
    assert back["p"].values.shape == (8, 8)
    assert all(not f.values.any() for f in back.values())
    assert back["p"].grid.origin == (-1.0, 0.0) and back["p"].grid.extent == (2.0, 2.0)


def test_dump_round_trip_is_bit_identical(tmp_path):
    sol = solve_problem(example1(), 128)
    path = tmp_path / "ex1.txt"
    dump_fields(sol.fields, path)
    back = read_fields(path)
    for name in ("u1", "u2", "p"):
        assert np.array_equal(back[name].values, getattr(sol.fields, name).values)
        assert back[name].family is getattr(sol.fields, name).family
    # V1 block: (N-1) * N interior values inside the (N+1) x (N+2) stored array
    u1 = back["u1"].values
    assert u1.shape == (129, 130)
    assert u1[GridFamily.VEDGE.unknowns(128)].size == 127 * 128
    text = path.read_text().splitlines()
    assert text[0] == "field u1 VEDGE" and text[5] == "shape 129 130"


def test_dump_io_failure_surfaces(tmp_path):
    with pytest.raises(OSError):
        dump_fields(zero_fields(4), tmp_path / "missing" / "out.txt")


# --- command line ---------------------------------------------------------


def test_cli_study_writes_csv(tmp_path, capsys):
    out = tmp_path / "study.csv"
    assert main(["study", "--problem", "example1", "--levels", "16,32", "--format", "csv",
                 "--no-timing", "--out", str(out)]) == 0
    rep = parse_csv(out.read_text())
    assert [lv.n for lv in rep.levels] == [16, 32]


def test_cli_study_table_to_stdout(capsys):
    assert main(["study", "--problem", "smooth", "--levels", "8 16"]) == 0
    assert capsys.readouterr().out.startswith("# smooth")


def test_cli_solve_dumps(tmp_path, capsys):
    dump, corr = tmp_path / "f.txt", tmp_path / "c.csv"
    assert main(["solve", "--problem", "example2", "--n", "32", "--dump", str(dump),
                 "--corrections-csv", str(corr)]) == 0
    assert "scaled errors" in capsys.readouterr().out
    assert set(read_fields(dump)) == {"u1", "u2", "p"}
    assert corr.read_text().startswith("family,i,j,value\n")


def test_cli_solve_plain_mac(capsys):
    assert main(["solve", "--problem", "example1", "--n", "16", "--no-corrections"]) == 0
    assert "corrected entries 0" in capsys.readouterr().out


def test_cli_jumps_table(capsys):
    assert main(["jumps", "--problem", "example1", "--points", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("t,p,")
    assert len(lines) == 5
    # [[p]] at t = 0 on the unit circle
    assert float(lines[1].split(",")[1]) == pytest.approx(5.0)


def test_cli_jumps_without_interface(capsys):
    assert main(["jumps", "--problem", "smooth"]) == 1


def test_cli_verify_quick(capsys):
    assert main(["verify", "--quick"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 6


def test_cli_reports_bad_problem(capsys):
    assert main(["solve", "--problem", "no_such_problem"]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_rejects_bad_levels():
    with pytest.raises(SystemExit) as info:
        main(["study", "--levels", "2,abc"])
    assert info.value.code == 2


def test_cli_reports_invalid_config(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    # x is not divergence free together with u2 = 0
    path.write_text("curve = none\nu1 = x\nu2 = 0\np = 0\n")
    assert main(["solve", "--problem", str(path), "--n", "8"]) == 2
    assert "divergence" in capsys.readouterr().err
