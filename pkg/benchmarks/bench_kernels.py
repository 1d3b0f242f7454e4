"""Time the compiled kernels against the numpy/scipy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 4000]

Each row reports the best of ``--repeat`` runs per backend and the ratio.
"""

import argparse
import sys
import timeit

import numpy as np

from sparsesqrt import SolverConfig, kernels, siai_f, tridiag
from sparsesqrt.sparse import SparseMatrix


def _banded(n, bw, seed=0):
    rng = np.random.default_rng(seed)
    rows, cols = [], []
    for d in range(-bw, bw + 1):
        i = np.arange(max(0, -d), min(n, n - d))
        rows.append(i)
        cols.append(i + d)
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    m = SparseMatrix.from_coo(n, n, rows, cols, rng.standard_normal(rows.size))
    return m.indptr, m.indices, m.data


def cases(n):
    a = _banded(n, 20)
    b = _banded(n, 20, seed=1)
    p, j, x = a
    x_small = x * 10.0 ** np.random.default_rng(2).uniform(-16, 0, x.shape)
    rng = np.random.default_rng(3)
    re, im = rng.uniform(-1, 1, 200_000), rng.uniform(-1, 1, 200_000)
    small = tridiag(n // 4)
    return {
        "matmul (bw 20)": lambda: kernels.matmul(*a, *b, n, n),
        "add (bw 20)": lambda: kernels.add(*a, *b, 0.75, 0.25, n, n),
        "column_filter": lambda: kernels.column_filter(p, j, x_small, n, 1e-10, 1e-15),
        "scan_region (2e5 pts)": lambda: kernels.scan_region(re, im, 0.5, 200, 1e-10),
        f"siai_f tridiag n={n // 4}": lambda: siai_f(small, SolverConfig()),
    }


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=4000)
    args = ap.parse_args(argv)

    if "cython" not in kernels.available():
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    print(f"{'case':<28}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    for name, fn in cases(args.n).items():
        times = {}
        for be in ("cython", "python"):
            prev = kernels.use_backend(be)
            try:
                fn()  # warm up
                times[be] = best_time(fn, args.repeat)
            finally:
                kernels.use_backend(prev)
        print(f"{name:<28}{times['cython']:>12.4f}{times['python']:>12.4f}"
              f"{times['python'] / times['cython']:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
