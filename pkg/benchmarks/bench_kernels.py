"""Compare the compiled and NumPy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from dpseries import _kernels_py
from dpseries.filters import autocorrelation, gaussian_kernel

try:
    from dpseries import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def cases():
    rng = np.random.default_rng(0)
    h = gaussian_kernel(2000, 10.0).h
    x = rng.random(2000) * 100
    idx = np.flatnonzero(rng.random(100_000) < 0.1)
    z = rng.standard_normal(len(idx))
    r = autocorrelation(gaussian_kernel(10_000, 10.0))
    gidx = np.flatnonzero(rng.random(10_000) < 0.1)
    return [
        ("circular_convolve T=2000", lambda m: m.circular_convolve(h, x)),
        ("interp_fill T=1e5 p=0.1", lambda m: m.interp_fill(idx, z, 100_000)),
        ("gram_lambda_max T=1e4 p=0.1", lambda m: m.gram_lambda_max(r, gidx)),
    ]


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels_c is None:
        print("compiled backend not built; only the NumPy timings are shown")
    print(f"{'kernel':<30}{'numpy (ms)':>12}{'cython (ms)':>13}{'speedup':>10}")
    for name, fn in cases():
        py = best_of(lambda: fn(_kernels_py), args.repeat) * 1e3
        if _kernels_c is None:
            print(f"{name:<30}{py:>12.2f}{'-':>13}{'-':>10}")
            continue
        c = best_of(lambda: fn(_kernels_c), args.repeat) * 1e3
        print(f"{name:<30}{py:>12.2f}{c:>13.2f}{py / c:>9.1f}x")


if __name__ == "__main__":
    main()
