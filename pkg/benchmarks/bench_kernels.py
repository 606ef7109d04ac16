"""Time the compiled Monte Carlo kernels against the NumPy fallback.

Both backends draw the same SplitMix64 streams, so the violation counts
must match exactly; the table shows how much the compiled loop saves.

    python3 benchmarks/bench_kernels.py --trials 200000
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from descbound._kernels import fallback
from descbound.rng import bernoulli_threshold

try:
    from descbound._kernels import _mc as extension
except ImportError:
    extension = None


def _time(fn, repeats: int) -> tuple[float, int]:
    best = float("inf")
    result = 0
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_chernoff(backend, trials: int, repeats: int) -> tuple[float, int]:
    threshold = bernoulli_threshold(0.5)
    # count_max for p=0.5, eps=0.1, n=100: mean <= 0.4 means <= 40 hits
    return _time(lambda: backend.chernoff_tail_count(
        seed=42, trials=trials, n=100, threshold=threshold, count_max=40),
        repeats)


def bench_coverage(backend, trials: int, repeats: int) -> tuple[float, int]:
    # 16 classifiers at p=0.2, n=2000, s_bits=4, C=100, delta=0.05:
    # the coverage check cuts each classifier off at 318 hits
    thresholds = np.full(16, bernoulli_threshold(0.2), dtype=np.uint64)
    count_maxes = np.full(16, 318, dtype=np.int64)
    return _time(lambda: backend.coverage_violation_count(
        seed=42, trials=trials, n=2000, thresholds=thresholds,
        count_maxes=count_maxes), repeats)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=200_000,
                        help="Monte Carlo trials per kernel (default 200000)")
    parser.add_argument("--coverage-trials", type=int, default=None,
                        help="trials for the coverage kernel (default: "
                             "--trials / 50; it draws 16x2000 per trial)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timing repeats, best-of (default 3)")
    args = parser.parse_args()
    cov_trials = (args.coverage_trials if args.coverage_trials is not None
                  else max(args.trials // 50, 1))

    backends = [("numpy fallback", fallback)]
    if extension is not None:
        backends.insert(0, ("cython extension", extension))
    else:
        print("compiled extension not importable; timing the fallback only")

    for title, trials, bench in [
            ("chernoff kernel", args.trials, bench_chernoff),
            ("coverage kernel", cov_trials, bench_coverage)]:
        print(f"\n{title} ({trials} trials)")
        rows = []
        for name, backend in backends:
            seconds, count = bench(backend, trials, args.repeats)
            rows.append((name, seconds, count))
            rate = trials / seconds / 1e6
            print(f"  {name:18s} {seconds:8.4f} s   "
                  f"{rate:7.2f} M trials/s   violations={count}")
        if len(rows) == 2:
            (_, fast, a), (_, slow, b) = rows
            if a != b:
                raise SystemExit(
                    f"backend mismatch: {a} != {b} violations")
            print(f"  speedup: {slow / fast:.1f}x, counts identical")


if __name__ == "__main__":
    main()
