"""Time the hot loops on the numba and numpy backends.

Run from the repository root:

    python benchmarks/bench_kernels.py --n 2000000 --window 40 --repeat 5

The first numba call includes JIT compilation, so every kernel is warmed up
once per backend before timing; reported numbers are the best of ``--repeat``
runs.
"""

import argparse
import time

import numpy as np

from feedbackcast import kernels


def _draws(n, seed=0):
    rng = np.random.default_rng(seed)
    theta = rng.normal(2.0, 1.0, n)
    x = rng.uniform(0.05, 1.5, n)
    eps = rng.normal(0.0, 0.5, n)
    return theta, x, eps


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2_000_000, help="draws per kernel call")
    parser.add_argument("--window", type=int, default=40, help="rolling window length")
    parser.add_argument("--repeat", type=int, default=5, help="timed runs per kernel")
    args = parser.parse_args()

    theta, x, eps = _draws(args.n)
    ys = 0.3 + 1.1 * theta + eps
    cases = {
        "react_play": lambda: kernels.react_play(theta, x, eps, 0.5, 1.0, 0.0, 1.0, 2.0),
        "menu_play": lambda: kernels.menu_play(theta, x, eps, 0.0, 0.5, 2.0),
        "mse_at": lambda: kernels.mse_at(1.7, 1.2, 0.0, 1.0, 2.0, x, eps),
        "rolling_ols": lambda: kernels.rolling_ols(theta, ys, args.window),
        "rolling_mean": lambda: kernels.rolling_mean(eps, args.window),
    }

    results = {}
    for backend in ("numpy", "numba"):
        try:
            kernels.set_backend(backend)
            kernels.active_backend()
        except Exception as exc:
            print(f"{backend}: unavailable ({exc})")
            continue
        for name, fn in cases.items():
            fn()  # warmup (JIT compile on numba)
            results[(backend, name)] = _time(fn, args.repeat)
    kernels.set_backend(None)

    print(f"n={args.n} window={args.window} repeat={args.repeat} (best run, seconds)")
    print(f"{'kernel':<14} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name in cases:
        plain = results.get(("numpy", name))
        jit = results.get(("numba", name))
        if plain is None or jit is None:
            continue
        ratio = plain / jit if jit > 0 else float("inf")
        print(f"{name:<14} {plain:>10.4f} {jit:>10.4f} {ratio:>7.1f}x")


if __name__ == "__main__":
    main()
