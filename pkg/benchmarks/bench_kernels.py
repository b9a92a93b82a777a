"""Compare the compiled and NumPy kernels on the hot paths.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Prints one row per (kernel, workload): best-of-repeat seconds for each
backend and the speedup. Both backends consume the same counter-based stream,
so the histograms they produce are checked for equality along the way.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from shelf_lab import _pykernels
from shelf_lab.shuffle import ShuffleSpec

try:
    from shelf_lab import _ckernels
except ImportError:
    _ckernels = None


def best_time(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def workloads(quick):
    scale = 10 if quick else 1
    yield "mc inversions n=52 m=10", "mc", (52, 10, 0, 20_000 // scale)
    yield "mc inversions n=1000 m=2", "mc", (1000, 2, 0, 2_000 // scale)
    yield "mc descents n=1000 m=1", "mc", (1000, 1, 1, 5_000 // scale)
    yield "enumerate n=10 m=2", "enum", (10, 2, 0, 4**10 // scale)
    yield "count inversions n=100000", "inv", (100_000,)


def run(kern, kind, args):
    if kind == "mc":
        n, m, stat, samples = args
        thr = ShuffleSpec(n, m).thresholds
        return lambda: kern.mc_chunk(0xBE7C, n, m, thr, samples, stat)[0]
    if kind == "enum":
        n, m, start, stop = args
        return lambda: kern.enumerate_chunk(n, m, start, stop)["inversions"]
    (n,) = args
    perm = np.random.default_rng(0).permutation(n).astype(np.int64) + 1
    return lambda: np.array([kern.count_inversions(perm)])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="one tenth of the default workload")
    args = ap.parse_args()

    if _ckernels is None:
        print("compiled kernels are not built; only the NumPy backend is timed")
    print(f"{'workload':<30} {'numpy s':>10} {'cython s':>10} {'speedup':>8}")
    for label, kind, wl in workloads(args.quick):
        t_py, r_py = best_time(run(_pykernels, kind, wl), args.repeat)
        if _ckernels is None:
            print(f"{label:<30} {t_py:>10.4f} {'-':>10} {'-':>8}")
            continue
        t_c, r_c = best_time(run(_ckernels, kind, wl), args.repeat)
        if not np.array_equal(r_py, r_c):
            raise SystemExit(f"backends disagree on {label}")
        print(f"{label:<30} {t_py:>10.4f} {t_c:>10.4f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
