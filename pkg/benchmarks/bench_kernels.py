"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--sizes 50,100,200] [--repeat 3]

Prints one row per (kernel, n) with the best-of-``repeat`` wall time of each
backend and the speed-up. The python backend is skipped above ``--python-max``
because it is slow for large n.
"""

import argparse
import time

import numpy as np

from esdlab import _backend
from esdlab.eigen import eigenvalues, hessenberg
from esdlab.matrix import log_abs_det_lu


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="50,100,200,400")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--python-max", type=int, default=200)
    args = ap.parse_args(argv)
    if _backend.compiled is None:
        raise SystemExit("compiled extension not built; run: python3 setup.py build_ext --inplace")

    kernels = {
        "hessenberg": hessenberg,
        "eigenvalues": lambda A, b: eigenvalues(A, b).eigenvalues,
        "lu_logdet": log_abs_det_lu,
    }
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12} {'n':>5} {'compiled_s':>11} {'python_s':>10} {'speedup':>8}")
    for n in (int(x) for x in args.sizes.split(",")):
        A = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2 * n)
        for name, fn in kernels.items():
            c = best_of(lambda: fn(A, "compiled"), args.repeat)
            if n <= args.python_max:
                p = best_of(lambda: fn(A, "python"), max(1, args.repeat // 2))
                print(f"{name:<12} {n:>5} {c:>11.4f} {p:>10.4f} {p / c:>7.1f}x")
            else:
                print(f"{name:<12} {n:>5} {c:>11.4f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
