"""Stencil kernels, numba vs numpy, plus one full solve per backend.

    python3 benchmarks/bench_kernels.py [--sizes 256 512 1024] [--repeat 20]

The full solve runs in a subprocess per backend because the backend is
chosen from STOKES_MAC_NUMBA when the kernels are dispatched.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from stokes_mac import _kernels


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'N':>6}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in sizes:
        full = rng.standard_normal((n + 1, n + 2))
        u1, u2 = rng.standard_normal((n + 1, n)), rng.standard_normal((n, n + 1))
        p = rng.standard_normal((n, n))
        cases = {
            "neg_laplacian": ((_kernels.neg_laplacian_np, _kernels.neg_laplacian_nb), (full, 4.0)),
            "divergence": ((_kernels.divergence_np, _kernels.divergence_nb), (u1, u2, 2.0)),
            "gradient": ((_kernels.gradient_np, _kernels.gradient_nb), (p, 2.0)),
        }
        for name, ((f_np, f_nb), args) in cases.items():
            f_nb(*args)  # compile
            t_np = min(timeit.repeat(lambda: f_np(*args), number=1, repeat=repeat))
            t_nb = min(timeit.repeat(lambda: f_nb(*args), number=1, repeat=repeat))
            print(f"{name:<14}{n:>6}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.2f}")


SOLVE = """
import time
from stokes_mac import example1, solve_problem
solve_problem(example1(), 64)
t = time.perf_counter()
s = solve_problem(example1(), {n})
print(f"{{time.perf_counter() - t:.3f}} {{s.fields.stats.iterations}}")
"""


def bench_solve(n):
    print(f"\nfull Example 1 solve at N={n}")
    for label, flag in (("numpy", "0"), ("numba", "1")):
        env = dict(os.environ, STOKES_MAC_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", SOLVE.format(n=n)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  {label:<6} {float(out[0]):8.3f} s  ({out[1]} CG iterations)")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--solve-n", type=int, default=512)
    a = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        sys.exit("numba is not installed")
    bench_kernels(a.sizes, a.repeat)
    bench_solve(a.solve_n)


if __name__ == "__main__":
    main()
