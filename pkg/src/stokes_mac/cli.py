"""Command-line entry point: ``stokes-mac {study,solve,verify,jumps}``."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .errors import StokesMACError
from .harness import dump_fields, emit, run_study
from .jumps import jumps_at
from .pipeline import solution_errors, solve_problem
from .problems import BUILTIN, get_problem, validate


def _levels(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from exc
    if not vals or any(v < 4 for v in vals):
        raise argparse.ArgumentTypeError("levels must be integers >= 4")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stokes-mac", description="MAC scheme for Stokes interface problems")
    sub = ap.add_subparsers(dest="cmd", required=True)
    problem_help = f"built-in name ({', '.join(BUILTIN)}) or path to a config file"

    st = sub.add_parser("study", help="grid-refinement convergence study")
    st.add_argument("--problem", default="example1", help=problem_help)
    st.add_argument("--levels", type=_levels, default=[64, 128, 256], help="e.g. 128,256,512")
    st.add_argument("--tol", type=float, default=None, help="CG relative tolerance")
    st.add_argument("--format", choices=("table", "csv"), default="table")
    st.add_argument("--out", default=None, help="write to file instead of stdout")
    st.add_argument("--no-timing", action="store_true", help="blank the seconds column")
    st.add_argument("--parallel-levels", action="store_true")

    so = sub.add_parser("solve", help="single solve")
    so.add_argument("--problem", default="example1", help=problem_help)
    so.add_argument("--n", type=int, default=128)
    so.add_argument("--tol", type=float, default=None)
    so.add_argument("--dump", default=None, help="write u1, u2, p to this file")
    so.add_argument("--corrections-csv", default=None, help="write the correction terms as CSV")
    so.add_argument("--no-corrections", action="store_true", help="plain MAC scheme")

    ve = sub.add_parser("verify", help="run the built-in property checks")
    ve.add_argument("--quick", action="store_true", help="skip the convergence check")

    ju = sub.add_parser("jumps", help="tabulate jumps along the interface")
    ju.add_argument("--problem", default="example1", help=problem_help)
    ju.add_argument("--points", type=int, default=16)
    return ap


def _write(text: str, out) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_study(a) -> int:
    rep = run_study(a.problem, a.levels, tol=a.tol, parallel=a.parallel_levels)
    _write(emit(rep, a.format, timing=not a.no_timing), a.out)
    if rep.failure:
        print(f"study stopped: {rep.failure}", file=sys.stderr)
        return 1
    return 0


def cmd_solve(a) -> int:
    spec = get_problem(a.problem)
    sol = solve_problem(spec, a.n, tol=a.tol, corrections=not a.no_corrections)
    st = sol.fields.stats
    print(f"{spec.name} N={a.n}: {st.iterations} CG iterations, "
          f"relative residual {st.residual_history[-1]:.2e}, {st.seconds:.2f}s, lambda={sol.fields.lam:.3e}")
    print(f"crossings {len(sol.crossings)}, corrected entries {len(sol.rhs.corrections)}")
    if spec.exact is not None:
        e = solution_errors(spec, sol).scaled
        print(f"scaled errors: |e_u| {e.l2_u:.3e}  |e_p| {e.l2_p:.3e}  |e_u|_1 {e.h1_semi_u:.3e}  "
              f"|e_u|_inf {e.max_u:.3e}  |e_u|_1,inf {e.max_grad_u:.3e}")
    if a.dump:
        dump_fields(sol.fields, a.dump)
    if a.corrections_csv:
        sol.rhs.corrections.to_csv(a.corrections_csv)
    return 0


def cmd_verify(a) -> int:
    from . import selfcheck

    results = selfcheck.run_all(quick=a.quick)
    ok = True
    for name, passed, detail in results:
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return 0 if ok else 1


def cmd_jumps(a) -> int:
    spec = get_problem(a.problem)
    if spec.curve is None:
        print(f"{spec.name} has no interface", file=sys.stderr)
        return 1
    t = np.linspace(0.0, spec.curve.period, a.points, endpoint=False)
    js = jumps_at(t, spec.curve, spec.interface_data).as_dict()
    keys = ["p", "u1x", "u1y", "u2x", "u2y", "px", "py", "u1xx", "u1xy", "u1yy", "u2xx", "u2xy", "u2yy"]
    print("t," + ",".join(keys))
    for k in range(len(t)):
        print(f"{t[k]:.6e}," + ",".join(f"{np.atleast_1d(js[c])[k]:.6e}" for c in keys))
    return 0


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    handler = {"study": cmd_study, "solve": cmd_solve, "verify": cmd_verify, "jumps": cmd_jumps}[a.cmd]
    try:
        if getattr(a, "problem", None) and a.cmd != "verify":
            spec = get_problem(a.problem)
            if spec.exact is not None:
                validate(spec)
        return handler(a)
    except StokesMACError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
