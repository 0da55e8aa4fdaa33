"""Compare the compiled and numpy distance kernels.

    python benchmarks/bench_kernels.py [--rows 2000] [--repeat 5]

Both backends are called directly, so the compiled one must have been
built (``pip install --no-build-isolation -e .``).  Outputs are checked
for bit-identical results before timing.
"""
import argparse
import statistics
import time

import numpy as np

from fataudit import _kernels_py

try:
    from fataudit import _kernels
except ImportError:
    _kernels = None


def make_inputs(n_a, n_b, n_num, n_cat, seed=0):
    rng = np.random.default_rng(seed)
    a_num = rng.normal(size=(n_a, n_num))
    b_num = rng.normal(size=(n_b, n_num))
    a_cat = rng.integers(0, 4, size=(n_a, n_cat)).astype(np.int64)
    b_cat = rng.integers(0, 4, size=(n_b, n_cat)).astype(np.int64)
    lo = np.minimum(a_num.min(0), b_num.min(0))
    hi = np.maximum(a_num.max(0), b_num.max(0))
    return a_num, a_cat, b_num, b_cat, hi - lo, n_num + n_cat


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--numeric", type=int, default=6)
    ap.add_argument("--categorical", type=int, default=4)
    ap.add_argument("--k", type=int, default=7)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    inputs = make_inputs(args.rows, args.rows, args.numeric, args.categorical)
    backends = {"numpy": _kernels_py}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled extension not built; timing the numpy fallback only")

    results = {}
    for name, mod in backends.items():
        dist = mod.pairwise_mixed_distance(*inputs)
        kth = mod.kth_smallest_rows(dist, args.k, True)
        results[name] = (dist, kth)
    if len(results) == 2:
        (d0, k0), (d1, k1) = results.values()
        assert np.array_equal(d0, d1), "distance matrices differ between backends"
        assert np.array_equal(k0, k1), "k-th distances differ between backends"

    print(f"{args.rows} x {args.rows} rows, {args.numeric} numeric + {args.categorical} categorical, k={args.k}")
    print(f"{'kernel':<24}{'backend':<10}{'best ms':>10}{'median ms':>12}")
    timings = {}
    for name, mod in backends.items():
        dist = results[name][0]
        for kname, fn in (
            ("pairwise_mixed_distance", lambda: mod.pairwise_mixed_distance(*inputs)),
            ("kth_smallest_rows", lambda: mod.kth_smallest_rows(dist, args.k, True)),
        ):
            best, med = best_of(fn, args.repeat)
            timings[kname, name] = best
            print(f"{kname:<24}{name:<10}{best * 1e3:>10.2f}{med * 1e3:>12.2f}")
    if len(backends) == 2:
        for kname in ("pairwise_mixed_distance", "kth_smallest_rows"):
            speedup = timings[kname, "numpy"] / timings[kname, "cython"]
            print(f"speedup {kname}: {speedup:.1f}x")


if __name__ == "__main__":
    main()
