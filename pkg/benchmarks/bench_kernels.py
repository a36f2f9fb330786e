"""Time the compiled kernels against the numpy fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--size N] [--repeat R]``.
Prints one line per kernel with the best time of each backend and the
speedup. Exits nonzero if the compiled extension is not built.
"""

import argparse
import sys
import timeit

import numpy as np

from gmemi import _kernels_py

try:
    from gmemi import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def cases(size, rng):
    u = rng.standard_normal(size)
    s = rng.standard_normal(size)
    x = 3.0 * rng.standard_normal(size)
    block = 8
    indptr = np.arange(0, size + block, block, dtype=np.int64)
    indptr[-1] = size
    indices = np.arange(size, dtype=np.int64)
    thresh = np.full(len(indptr) - 1, 0.5)
    return {
        "perspective_prox": lambda k: k.perspective_prox(u, s, 0.7),
        "perspective_latent_prox": lambda k: k.perspective_latent_prox(u, s, 0.7),
        "project_l1_ball_sort": lambda k: k.project_l1_ball_sort(x, 5.0),
        "project_l1_ball_pivot": lambda k: k.project_l1_ball_pivot(x, 5.0),
        "soft_threshold": lambda k: k.soft_threshold(x, 0.5),
        "group_shrink": lambda k: k.group_shrink(x, indptr, indices, thresh),
    }


def best_time(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=4096)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=50)
    args = parser.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26}{'python [us]':>14}{'cython [us]':>14}{'speedup':>10}")
    for name, call in cases(args.size, rng).items():
        a, b = np.hstack(call(_kernels_py)), np.hstack(call(_kernels_c))
        if not np.allclose(a, b, rtol=1e-12, atol=1e-12):
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        tp = best_time(lambda: call(_kernels_py), args.repeat, args.number)
        tc = best_time(lambda: call(_kernels_c), args.repeat, args.number)
        print(f"{name:<26}{tp * 1e6:>14.1f}{tc * 1e6:>14.1f}{tp / tc:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
