"""Compare the compiled geometry kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--sizes 100,400,1000] [--repeats 5]

Reports best-of-N wall time per backend for the pairwise IoU matrix and the
greedy matcher, and asserts the outputs are identical while it is at it.
"""

import argparse
import random
import time

import numpy as np

from chartkit import _py_kernels

try:
    from chartkit import _kernels
except ImportError:
    _kernels = None


def random_boxes(rng, n, span=1000):
    out = np.empty((n, 4), dtype=np.float64)
    for i in range(n):
        x0, x1 = sorted(rng.uniform(0, span) for _ in range(2))
        y0, y1 = sorted(rng.uniform(0, span) for _ in range(2))
        out[i] = (x0, y0, x1 + 1.0, y1 + 1.0)
    return out


def best_of(repeats, fn, *args):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="100,400,1000")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _kernels is None:
        print("compiled kernels unavailable; showing the fallback only")

    rng = random.Random(42)
    header = f"{'n':>6} {'op':<12} {'python':>12} {'compiled':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        preds = random_boxes(rng, n)
        gts = random_boxes(rng, n)

        t_py, mat_py = best_of(args.repeats, _py_kernels.pairwise_iou, preds, gts)
        if _kernels is not None:
            t_c, mat_c = best_of(args.repeats, _kernels.pairwise_iou, preds, gts)
            assert np.array_equal(np.asarray(mat_py), np.asarray(mat_c)), "IoU outputs differ"
            print(f"{n:>6} {'pairwise_iou':<12} {t_py * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms {t_py / t_c:>7.1f}x")
        else:
            print(f"{n:>6} {'pairwise_iou':<12} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>8}")

        mat = np.asarray(mat_py)
        t_py, pairs_py = best_of(args.repeats, _py_kernels.greedy_match_pairs, mat, 0.3)
        if _kernels is not None:
            t_c, pairs_c = best_of(args.repeats, _kernels.greedy_match_pairs, mat, 0.3)
            assert list(pairs_py) == list(pairs_c), "greedy matches differ"
            print(f"{n:>6} {'greedy_match':<12} {t_py * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms {t_py / t_c:>7.1f}x")
        else:
            print(f"{n:>6} {'greedy_match':<12} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
