"""Compiled versus numpy kernels on the pair scans that dominate solves.

    python3 benchmarks/bench_kernels.py [--sizes 256 1024 4096] [--repeat 3]

Prints one line per (kernel, n, d): best wall time of each back end, the
speedup, and the relative difference of the results.
"""

import argparse
import time

import numpy as np

from roughlab import kernels, make_grid
from roughlab.lift import SignalSpec, signal_path


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n, d):
    R = signal_path(SignalSpec("bm", d, seed=1), make_grid(1.0, n), 0.45)
    R2 = signal_path(SignalSpec("bm", d, seed=2), make_grid(1.0, n), 0.45)
    t = R.grid.times
    yp = np.random.default_rng(0).normal(size=(n + 1, 1, d))
    dv = np.cumsum(np.random.default_rng(1).normal(size=(n + 1, 1)), axis=0)
    return {
        "increment": lambda impl: kernels.holder_increment(R.x, t, 0.45, impl=impl),
        "remainder": lambda impl: kernels.holder_remainder(dv, yp, R.x, t, 0.9, yp2=yp, x2=R2.x,
                                                           impl=impl),
        "area": lambda impl: kernels.holder_area(R.x, R.xx, t, 0.9, impl=impl),
        "cumsum": lambda impl: kernels.neumaier_cumsum(np.diff(dv, axis=0), impl=impl),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled kernels unavailable; timing the numpy back end only")
    print(f"{'kernel':<10} {'n':>6} {'d':>2} " + " ".join(f"{k + ' [s]':>12}" for k in impls)
          + f" {'speedup':>8} {'rel diff':>9}")
    for n in args.sizes:
        for d in args.dims:
            for name, fn in cases(n, d).items():
                res = {k: best_of(lambda m=m: fn(m), args.repeat) for k, m in impls.items()}
                times = " ".join(f"{res[k][0]:12.4f}" for k in impls)
                if "cython" in res:
                    speed = res["python"][0] / res["cython"][0]
                    a = np.asarray(res["python"][1], dtype=float)
                    b = np.asarray(res["cython"][1], dtype=float)
                    diff = float(np.abs(a - b).max() / max(np.abs(a).max(), 1e-300))
                    print(f"{name:<10} {n:>6} {d:>2} {times} {speed:8.1f} {diff:9.1e}")
                else:
                    print(f"{name:<10} {n:>6} {d:>2} {times}")


if __name__ == "__main__":
    main()
