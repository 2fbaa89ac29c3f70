"""Time the numba-jitted kernels against the pure-numpy fallbacks.

Run: python benchmarks/bench_kernels.py [--repeats N]
The numba column includes a warmup call so compile time is not measured.
"""

import argparse
import time

import numpy as np

from dtstyle import _kernels_numpy as knp

try:
    from dtstyle import _kernels_numba as knb
except ImportError:
    knb = None


def timeit(fn, *args, repeats=5):
    fn(*args)  # warmup (and jit compile)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = []

    x = rng.normal(size=(64, 128, 128))
    k = rng.normal(size=(64, 64, 3, 3))
    b = rng.normal(size=64)
    cases.append(("conv3x3 64ch 128x128", "conv3x3_forward", (x, k, b)))

    x = rng.normal(size=(256, 32, 32))
    k = rng.normal(size=(256, 256, 3, 3))
    b = rng.normal(size=256)
    cases.append(("conv3x3 256ch 32x32", "conv3x3_forward", (x, k, b)))

    x = rng.normal(size=(64, 256, 256))
    cases.append(("maxpool 64ch 256x256", "pool2x2_max_forward", (x,)))

    fg = (rng.random((512, 512)) < 0.01).astype(np.uint8)
    fg[0, 0] = 1
    cases.append(("edt 512x512 sparse", "edt_sq", (fg,)))

    fg = (rng.random((1024, 1024)) < 0.3).astype(np.uint8)
    cases.append(("edt 1024x1024 dense", "edt_sq", (fg,)))

    header = f"{'kernel':<26}{'numpy':>12}{'numba':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, fn_name, fn_args in cases:
        t_np = timeit(getattr(knp, fn_name), *fn_args, repeats=args.repeats)
        if knb is None:
            print(f"{label:<26}{t_np * 1e3:>10.2f}ms{'n/a':>12}{'':>10}")
            continue
        t_nb = timeit(getattr(knb, fn_name), *fn_args, repeats=args.repeats)
        print(f"{label:<26}{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>9.2f}x")


if __name__ == "__main__":
    main()
