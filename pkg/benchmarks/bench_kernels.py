"""Benchmark the numba kernels against the pure-numpy fallback.

Usage:
    python benchmarks/bench_kernels.py

Runs each kernel in both variants on assembly-shaped workloads (many small
element batches and one large composite-rule batch) and prints the timing
ratio.  The numpy fallback is what you get with HPDG_PURE_NUMPY=1.
"""

import time

import numpy as np

from hpdg import _kernels


def timeit(fn, *args, repeat=5, inner=1):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def bench(name, np_fn, nb_fn, args, inner=1):
    t_np = timeit(np_fn, *args, inner=inner)
    if nb_fn is not None:
        nb_fn(*args)  # compile outside the timed region
        t_nb = timeit(nb_fn, *args, inner=inner)
        print(f"{name:34s} numpy {t_np * 1e3:8.3f} ms   numba {t_nb * 1e3:8.3f} ms   "
              f"speedup {t_np / t_nb:5.2f}x")
    else:
        print(f"{name:34s} numpy {t_np * 1e3:8.3f} ms   numba unavailable")


def main():
    print(f"numba active: {_kernels.HAVE_NUMBA}")
    rng = np.random.default_rng(0)

    # small-batch shape: a face rule on a p = 3 element (2D)
    x_small = rng.uniform(-1, 1, size=7)
    # large-batch shape: composite singular rule, depth 60, n = 7 (3D)
    x_large = rng.uniform(-1, 1, size=7 * (60 * 7 + 1) * 49)

    nb = _kernels.HAVE_NUMBA
    bench("legendre_table small (7 pts)",
          lambda x: _kernels._legendre_table_np(x, 4),
          (lambda x: _kernels._legendre_table_nb(x, 4)) if nb else None,
          (x_small,), inner=200)
    bench("legendre_table large (144k pts)",
          lambda x: _kernels._legendre_table_np(x, 4),
          (lambda x: _kernels._legendre_table_nb(x, 4)) if nb else None,
          (x_large,))

    a = rng.standard_normal((343, 4))
    b = rng.standard_normal((343, 16))
    bench("row_kron (343 x 4 x 16)",
          _kernels._row_kron_np, _kernels._row_kron_nb if nb else None,
          (a, b), inner=50)

    phi = rng.standard_normal((2941, 64))
    w = rng.uniform(0.1, 1.0, size=2941)
    bench("weighted_gram (2941 x 64)",
          _kernels._weighted_gram_np, _kernels._weighted_gram_nb if nb else None,
          (phi, w), inner=10)

    phi2 = rng.standard_normal((49, 16))
    w2 = rng.uniform(0.1, 1.0, size=49)
    bench("weighted_gram small (49 x 16)",
          _kernels._weighted_gram_np, _kernels._weighted_gram_nb if nb else None,
          (phi2, w2), inner=500)


if __name__ == "__main__":
    main()
