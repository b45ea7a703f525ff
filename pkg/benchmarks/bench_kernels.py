"""Compiled vs pure-Python kernels.

Times the likelihood building blocks and one full order selection with each
backend and prints a table of median wall times and speedups::

    python benchmarks/bench_kernels.py [--n 600] [--repeat 5]
"""
from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from solarstudy import _kernels_py, arma
from solarstudy.arma import arma_model, simulate

try:
    from solarstudy import _kernels
except ImportError:
    _kernels = None


def _median_time(fn, repeat, min_time=0.05):
    # loop each sample until it lasts min_time so tiny calls are measurable
    fn()
    loops = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(loops):
            fn()
        dt = time.perf_counter() - t0
        if dt >= min_time:
            break
        loops *= 2
    samples = [dt / loops]
    for _ in range(repeat - 1):
        t0 = time.perf_counter()
        for _ in range(loops):
            fn()
        samples.append((time.perf_counter() - t0) / loops)
    return statistics.median(samples)


def cases(n):
    x = simulate(arma_model((0.5, -0.2), (0.4,)), n, 0)
    xc = x - x.mean()
    ar, ma = (0.5, -0.2, 0.1), (0.4, 0.2)
    u3 = np.array([0.3, -0.2, 0.1, 0.4, 0.1])
    u10 = np.linspace(-0.5, 0.5, 10)

    def make(k):
        return {
            "arma_acvf (3,2), 50 lags": lambda: k.arma_acvf(ar, ma, 50),
            f"innovations (3,2), n={n}": lambda: k.innovations(ar, ma, n),
            f"reduced_likelihood (3,2), n={n}": lambda: k.reduced_likelihood(xc, ar, ma),
            f"objective + gradient (3,2), n={n}": lambda: k.profile_objective_grad(u3, xc, 3, True),
            f"objective + gradient (5,5), n={n}": lambda: k.profile_objective_grad(u10, xc, 5, True),
        }
    return x, make


def select_case(kernels, x):
    def run():
        saved = arma.kernels
        arma.kernels = kernels
        try:
            arma.select_order(x, 2, 2)
        finally:
            arma.kernels = saved
    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=600, help="series length")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; nothing to compare", file=sys.stderr)
        return 1

    x, make = cases(args.n)
    fast, slow = make(_kernels), make(_kernels_py)
    rows = [(name, _median_time(fast[name], args.repeat), _median_time(slow[name], args.repeat))
            for name in fast]
    name = f"select_order 3x3 grid, n={args.n}"
    rows.append((name, _median_time(select_case(_kernels, x), 3, 0.0),
                 _median_time(select_case(_kernels_py, x), 3, 0.0)))

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'cython':>12}  {'python':>12}  {'speedup':>8}")
    for name, tc, tp in rows:
        print(f"{name:<{width}}  {tc * 1e3:>10.3f}ms  {tp * 1e3:>10.3f}ms  {tp / tc:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
