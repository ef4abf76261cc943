"""Compare the numba and pure-numpy kernel backends.

Times one SGD epoch, dataset RMSE and the rolling median on synthetic data
and prints per-call time and the speedup. Run with ``python
benchmarks/bench_kernels.py [--examples N] [--repeat R]``.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from aging_forecast import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    parser = argparse.ArgumentParser(description="numba vs numpy kernel benchmark")
    parser.add_argument("--examples", type=int, default=3000)
    parser.add_argument("--lags", type=int, default=6)
    parser.add_argument("--hidden", type=int, default=7)
    parser.add_argument("--window", type=int, default=25)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    d, h = args.lags, args.hidden
    X = rng.uniform(size=(args.examples, d))
    y = rng.uniform(size=args.examples)
    p0 = rng.normal(scale=0.3, size=kernels.n_params(d, h))
    order = rng.permutation(args.examples)
    series = rng.normal(size=args.examples)

    backends = {"numpy": kernels.get_backend("numpy")}
    if kernels.numba_backend is not None or kernels._load_numba() is not None:
        backends["numba"] = kernels.get_backend("numba")

    cases = {
        "sgd_epoch": lambda k: k.sgd_epoch(p0.copy(), d, h, False, X, y, order, 0.05),
        "dataset_rmse": lambda k: k.dataset_rmse(p0, d, h, False, X, y),
        "rolling_median": lambda k: k.rolling_median(series, args.window),
    }
    print(f"examples={args.examples} topology=({d},{h}) window={args.window}")
    print(f"{'kernel':<16}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for label, call in cases.items():
        row = {}
        for name, mod in backends.items():
            call(mod)  # warm-up / JIT compile
            row[name] = best_of(lambda: call(mod), args.repeat)
        speedup = row["numpy"] / row["numba"] if "numba" in row else float("nan")
        print(f"{label:<16}" + "".join(f"{row[n] * 1e3:>12.3f}ms" for n in backends)
              + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
