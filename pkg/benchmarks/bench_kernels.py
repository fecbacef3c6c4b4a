#!/usr/bin/env python3
"""Benchmark the hot kernels under both backends.

Runs the all-pairs distance matrix and one greedy placement step on random
data, once with the compiled (numba) backend and once with the pure-numpy
fallback (CONCEST_DISABLE_NUMBA=1), each in a fresh subprocess so the backend
choice is made at import time, and prints a side-by-side table.

    python3 benchmarks/bench_kernels.py [--m 2000] [--n 32] [--repeats 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

HERE = os.path.dirname(os.path.abspath(__file__))


def run_backend(disable_numba, args):
    env = dict(os.environ)
    if disable_numba:
        env["CONCEST_DISABLE_NUMBA"] = "1"
    else:
        env.pop("CONCEST_DISABLE_NUMBA", None)
    cmd = [sys.executable, os.path.abspath(__file__), "--worker",
           "--m", str(args.m), "--n", str(args.n), "--repeats", str(args.repeats)]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def worker(args):
    sys.path.insert(0, os.path.join(HERE, "..", "src"))
    import numpy as np

    from concest import NUMBA_ENABLED
    from concest._kernels import best_placement_cached, pairwise_matrix
    from concest.geometry import Metric

    rng = np.random.default_rng(0)
    coords = rng.normal(size=(args.m, args.n))
    lu = rng.uniform(0, 2, args.m)
    active = np.arange(args.m, dtype=np.int64)
    k_lo, k_hi = max(1, args.m // 40), args.m // 4

    def best_time(fn):
        # warm-up triggers JIT compilation under numba
        fn()
        return min(timeit(fn) for _ in range(args.repeats))

    def timeit(fn):
        t0 = time.perf_counter()
        fn()
        return time.perf_counter() - t0

    timings = {"backend": "numba" if NUMBA_ENABLED else "numpy"}
    timings["pairwise_matrix"] = best_time(
        lambda: pairwise_matrix(coords, Metric.L2.code))
    dmat = pairwise_matrix(coords, Metric.L2.code)
    timings["best_placement"] = best_time(
        lambda: best_placement_cached(dmat, active, active, lu,
                                      k_lo, k_hi, 0.25, 0.0))
    print(json.dumps(timings))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=2000, help="number of points")
    ap.add_argument("--n", type=int, default=32, help="dimension")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.worker:
        worker(args)
        return

    results = [run_backend(False, args), run_backend(True, args)]
    kernels = ("pairwise_matrix", "best_placement")
    print(f"m={args.m} n={args.n} (best of {args.repeats})")
    header = f"{'kernel':<18}" + "".join(f"{r['backend']:>12}" for r in results) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for k in kernels:
        times = [r[k] for r in results]
        speedup = times[1] / times[0] if times[0] > 0 else float("inf")
        print(f"{k:<18}" + "".join(f"{t:>11.4f}s" for t in times) + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
