"""Grid-refinement studies, report formatting and field dumps."""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import StokesMACError
from .grid import Field, GridFamily, StaggeredGrid
from .pipeline import solution_errors, solve_problem
from .problems import ProblemSpec, get_problem
from .solver import StokesFields

COLUMNS = ("eu_l2", "ep_l2", "eu_h1", "eu_max", "eu_gradmax")
_NORM_OF = dict(zip(COLUMNS, ("l2_u", "l2_p", "h1_semi_u", "max_u", "max_grad_u")))
CSV_HEADER = ("N", "eu_l2", "order", "ep_l2", "order", "eu_h1", "order", "eu_max", "order",
              "eu_gradmax", "order", "cg_iters", "seconds")


@dataclass
class Level:
    n: int
    errors: dict
    cg_iters: int
    seconds: float | None = None


@dataclass
class ConvergenceReport:
    problem: str
    levels: list = dc_field(default_factory=list)
    failure: str | None = None
    printed_orders: list | None = None  # set by parse_csv so emit reproduces the input bytes

    def orders(self) -> list[dict]:
        """Observed order per column, None where the N ratio is not 2."""
        if self.printed_orders is not None:
            return self.printed_orders
        out = [dict.fromkeys(COLUMNS)]
        for a, b in zip(self.levels, self.levels[1:]):
            row = dict.fromkeys(COLUMNS)
            if b.n == 2 * a.n:
                for c in COLUMNS:
                    ea, eb = a.errors[c], b.errors[c]
                    if ea > 0 and eb > 0:
                        row[c] = math.log2(ea / eb)
            out.append(row)
        return out[: len(self.levels)]

    def column(self, name: str) -> list[float]:
        return [lv.errors[name] for lv in self.levels]


def measure(spec: ProblemSpec, n: int, tol=None) -> Level:
    sol = solve_problem(spec, n, tol=tol)
    scaled = solution_errors(spec, sol).scaled
    errs = {c: float(getattr(scaled, _NORM_OF[c])) for c in COLUMNS}
    st = sol.fields.stats
    return Level(n, errs, st.iterations, st.seconds)


def run_study(problem, levels, tol=None, parallel: bool = False) -> ConvergenceReport:
    """Solve at each N and collect scaled errors.

    A failing level stops the study; the levels already done are kept and the
    failure message is stored on the report.
    """
    spec = problem if isinstance(problem, ProblemSpec) else get_problem(problem)
    report = ConvergenceReport(spec.name)
    levels = list(levels)
    if parallel and len(levels) > 1:
        with ThreadPoolExecutor(len(levels)) as ex:
            futures = [ex.submit(measure, spec, n, tol) for n in levels]
            for n, fut in zip(levels, futures):
                try:
                    report.levels.append(fut.result())
                except StokesMACError as exc:
                    report.failure = f"N={n}: {exc}"
                    break
        return report
    for n in levels:
        try:
            report.levels.append(measure(spec, n, tol))
        except StokesMACError as exc:
            report.failure = f"N={n}: {exc}"
            break
    return report


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    return "" if v is None else f"{v:.6e}"


def emit(report: ConvergenceReport, fmt: str = "table", timing: bool = True) -> str:
    """Render the report.  ``timing=False`` blanks the seconds column so the
    CSV bytes depend only on the numerics."""
    orders = report.orders()
    if fmt == "csv":
        buf = io.StringIO(newline="")
        buf.write(",".join(CSV_HEADER) + "\n")
        for lv, od in zip(report.levels, orders):
            cells = [str(lv.n)]
            for c in COLUMNS:
                cells += [_fmt(lv.errors[c]), _fmt(od[c])]
            cells += [str(lv.cg_iters), _fmt(lv.seconds) if timing else ""]
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    head = f"{'N':>6} " + " ".join(f"{c:>11} {'order':>6}" for c in COLUMNS) + f" {'cg':>4}"
    lines = [f"# {report.problem}", head]
    for lv, od in zip(report.levels, orders):
        row = f"{lv.n:>6} " + " ".join(
            f"{lv.errors[c]:>11.3e} {('-' if od[c] is None else f'{od[c]:.2f}'):>6}" for c in COLUMNS
        )
        lines.append(row + f" {lv.cg_iters:>4}")
    if report.failure:
        lines.append(f"# stopped: {report.failure}")
    return "\n".join(lines) + "\n"


def parse_csv(text: str, problem: str = "") -> ConvergenceReport:
    """Inverse of ``emit(..., 'csv')``; the printed orders are kept as read."""
    rows = text.splitlines()
    if not rows or tuple(rows[0].split(",")) != CSV_HEADER:
        raise ValueError("not a convergence CSV")
    rep = ConvergenceReport(problem, printed_orders=[])
    for line in rows[1:]:
        cells = line.split(",")
        errs = {c: float(cells[1 + 2 * k]) for k, c in enumerate(COLUMNS)}
        ords = {c: (float(cells[2 + 2 * k]) if cells[2 + 2 * k] else None) for k, c in enumerate(COLUMNS)}
        secs = float(cells[12]) if cells[12] else None
        rep.levels.append(Level(int(cells[0]), errs, int(cells[11]), secs))
        rep.printed_orders.append(ords)
    return rep


# --------------------------------------------------------------------------
# field dumps

_DUMP_ORDER = (("u1", GridFamily.VEDGE), ("u2", GridFamily.HEDGE), ("p", GridFamily.CELL))


def dump_fields(solution: StokesFields, path) -> None:
    """Plain text, one block per field::

        field u1 VEDGE
        N 128
        origin x0 y0
        extent Lx Ly
        h h
        shape rows cols
        <rows lines of row-major values, %.17e>
    """
    with open(path, "w", newline="\n") as fh:
        for name, _ in _DUMP_ORDER:
            f: Field = getattr(solution, name)
            g = f.grid
            fh.write(f"field {name} {f.family.name}\n")
            fh.write(f"N {g.n}\n")
            fh.write(f"origin {g.origin[0]:.17e} {g.origin[1]:.17e}\n")
            fh.write(f"extent {g.extent[0]:.17e} {g.extent[1]:.17e}\n")
            fh.write(f"h {g.h:.17e}\n")
            fh.write(f"shape {f.values.shape[0]} {f.values.shape[1]}\n")
            np.savetxt(fh, f.values, fmt="%.17e")


def read_fields(path) -> dict[str, Field]:
    out = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    k = 0
    while k < len(lines):
        _, name, fam = lines[k].split()
        n = int(lines[k + 1].split()[1])
        x0, y0 = (float(v) for v in lines[k + 2].split()[1:])
        lx, ly = (float(v) for v in lines[k + 3].split()[1:])
        rows, cols = (int(v) for v in lines[k + 5].split()[1:])
        body = lines[k + 6 : k + 6 + rows]
        vals = np.array([[float(v) for v in ln.split()] for ln in body]).reshape(rows, cols)
        grid = StaggeredGrid(n, (x0, y0), (lx, ly))
        out[name] = Field(grid, GridFamily[fam], vals)
        k += 6 + rows
    return out
