"""Time the numba and numpy paths of the two hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

The numba path is compiled once before timing.
"""
import argparse
import timeit
from fractions import Fraction

import numpy as np

from liespec import _kernels
from liespec.reps import su2_irrep


def jacobi_case(n, rng):
    X = rng.normal(size=(n, n))
    return (X + X.T,)


def contract_case(j, rng):
    X = rng.normal(size=(3, 3))
    ginv = np.linalg.inv(X @ X.T + np.eye(3))
    return ginv, su2_irrep(Fraction(j)).generators


def bench(fn, args, repeat, number):
    times = timeit.repeat(lambda: fn(*args), repeat=repeat, number=number)
    return min(times) / number


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can run")
        return
    rng = np.random.default_rng(0)
    rows = []
    for n in (8, 16, 32, 64):
        case = jacobi_case(n, rng)
        jit = bench(lambda a: _kernels.jacobi_eigenvalues(a, use_numba=True), case, 1, 1)  # compile
        number = max(1, 200 // n)
        jit = bench(lambda a: _kernels.jacobi_eigenvalues(a, use_numba=True), case, args.repeat, number)
        ref = bench(lambda a: _kernels.jacobi_eigenvalues(a, use_numba=False), case, args.repeat, number)
        rows.append((f"jacobi n={n}", jit, ref))
    for j in ("1/2", "5/2", "15/2", "31/2"):
        case = contract_case(j, rng)
        _kernels.laplace_contract(*case, use_numba=True)
        jit = bench(lambda g, P: _kernels.laplace_contract(g, P, use_numba=True), case, args.repeat, 200)
        ref = bench(lambda g, P: _kernels.laplace_contract(g, P, use_numba=False), case, args.repeat, 200)
        rows.append((f"contract j={j}", jit, ref))

    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, jit, ref in rows:
        print(f"{name:<18}{jit * 1e3:>12.4f}{ref * 1e3:>12.4f}{ref / jit:>9.1f}x")


if __name__ == "__main__":
    main()
