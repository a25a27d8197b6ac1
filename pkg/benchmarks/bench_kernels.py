#!/usr/bin/env python3
"""Compare the numba and numpy enumeration kernels over site sizes.

Usage: python3 benchmarks/bench_kernels.py [--max-sectors 8] [--repeat 5]
"""

import argparse
import time

import numpy as np

from dynsplit import _kernels
from dynsplit.optimizer import SiteTables, Objective
from dynsplit.model import CellConfig


def best_of(func, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-sectors", type=int, default=3)
    ap.add_argument("--max-sectors", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    if not _kernels.HAVE_NUMBA:
        print("numba not installed; timing numpy only")
    print(f"{'sectors':>7s} {'combos':>9s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}  equal")
    for n in range(args.min_sectors, args.max_sectors + 1):
        loads = rng.uniform(0, 1, n)
        tables = SiteTables([CellConfig()] * n, loads, Objective(2.0))
        arrays = tables.arrays()
        t_np = best_of(_kernels.enumerate_numpy, arrays, args.repeat)
        if _kernels.HAVE_NUMBA:
            _kernels.enumerate_numba(*arrays)  # compile outside the timed region
            t_nb = best_of(_kernels.enumerate_numba, arrays, args.repeat)
            same = all(np.array_equal(a, b) for a, b in zip(_kernels.enumerate_numpy(*arrays),
                                                             _kernels.enumerate_numba(*arrays)))
            print(f"{n:7d} {6 ** n:9d} {t_np * 1e3:10.3f} {t_nb * 1e3:10.3f} {t_np / t_nb:8.2f}  {same}")
        else:
            print(f"{n:7d} {6 ** n:9d} {t_np * 1e3:10.3f} {'-':>10s} {'-':>8s}  -")


if __name__ == "__main__":
    main()
