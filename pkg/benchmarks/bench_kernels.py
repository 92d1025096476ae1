"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from wickgen import _pykernels

try:
    from wickgen import _ckernels
except ImportError:
    _ckernels = None

P = 2**31 - 1


def rref_case(rows, cols, seed=0):
    a = np.random.default_rng(seed).integers(-50, 50, size=(rows, cols)) % P
    return lambda mod: mod.rref_modp(a.copy(), P)


def multigraph_case(sizes):
    n = len(sizes)
    anti = [False] * n
    autos = [list(range(n))]
    return lambda mod: mod.enumerate_multigraphs(sizes, anti, autos)


CASES = {
    "rref_modp 60x200": rref_case(60, 200),
    "rref_modp 200x400": rref_case(200, 400),
    "multigraphs [2,2,2,2,2]": multigraph_case([2, 2, 2, 2, 2]),
    "multigraphs [4,2,2,2,2]": multigraph_case([4, 2, 2, 2, 2]),
    "multigraphs [1]*10": multigraph_case([1] * 10),
}


def best(fn, mod, repeat):
    return min(timeit.repeat(lambda: fn(mod), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the fallback is timed")
    print("%-26s %12s %12s %8s" % ("case", "python [s]", "cython [s]", "speedup"))
    for name, fn in CASES.items():
        py = best(fn, _pykernels, args.repeat)
        if _ckernels is None:
            print("%-26s %12.4f %12s %8s" % (name, py, "-", "-"))
        else:
            cy = best(fn, _ckernels, args.repeat)
            print("%-26s %12.4f %12.4f %7.1fx" % (name, py, cy, py / cy))


if __name__ == "__main__":
    main()
