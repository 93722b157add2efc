"""Time the compiled core against the numpy fallback on the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from reefgpr import _kernels
from reefgpr.dataset import synthetic_reef
from reefgpr.models.svr import KernelSpec, gram, scale_gamma


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--rows", type=int, default=303)
    args = ap.parse_args()

    ds = synthetic_reef(args.rows, seed=1)
    X = (ds.X - ds.X.mean(0)) / np.where(ds.X.std(0) > 0, ds.X.std(0), 1.0)
    K = gram(KernelSpec("rbf", gamma=scale_gamma(X)), X, X)
    idx = np.arange(X.shape[0], dtype=np.intp)
    feats = np.arange(X.shape[1], dtype=np.intp)
    n = X.shape[0]

    cases = {
        "smo_solve (rbf, n=%d)" % n: lambda impl: impl.smo_solve(K, ds.y, 0.1, 1.0, 1e-3, 200 * n, False),
        "best_split x50 (n=%d, p=%d)" % X.shape: lambda impl: [impl.best_split(X, ds.y, idx, feats, 1)
                                                             for _ in range(50)],
    }
    impls = _kernels.backends()
    print(f"{'kernel':32s}" + "".join(f"{name:>12s}" for name in impls) + "     speedup")
    for label, run in cases.items():
        times = {name: _best_of(lambda: run(impl), args.repeat) for name, impl in impls.items()}
        line = f"{label:32s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times.values())
        if "cython" in times:
            line += f"  {times['python'] / times['cython']:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
