"""Benchmark: compiled stencil core vs pure-numpy fallback.

The centered coefficient-difference accumulation is the hot kernel behind
every operator application, so the comparison is run both at the kernel
level (one axis sweep) and end to end (full identity evaluation on a 3D
Heisenberg grid).

Usage:  python benchmarks/bench_kernels.py [--points 65] [--repeats 5]

The end-to-end row uses whichever kernel backend the package selected at
import; set SHARPREM_PURE_PYTHON=1 to time the fallback build.
"""

import argparse
import time

import numpy as np

from sharprem._kernels import KERNEL_BACKEND, accumulate_axis_diff
from sharprem.grid import GridFunction, build_box_domain
from sharprem.fields import FDOperators, heisenberg
from sharprem.friedrichs import friedrichs_identity


def best_of(repeats, fn):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernel(n, repeats):
    shape = (n, n, n)
    rng = np.random.default_rng(0)
    u = np.ascontiguousarray(rng.standard_normal(shape))
    coeff = np.ascontiguousarray(rng.standard_normal(shape))
    out = np.zeros(shape)
    rows = []
    for label, c in (("array coeff", coeff), ("scalar coeff", 0.5)):
        for axis in range(3):
            t_cy = best_of(
                repeats, lambda: accumulate_axis_diff(u, c, axis, 1.0, out)
            )
            t_py = best_of(
                repeats,
                lambda: accumulate_axis_diff(u, c, axis, 1.0, out, force_numpy=True),
            )
            rows.append((f"{label}, axis {axis}", t_cy, t_py))
    return rows


def bench_identity(n, repeats):
    d = build_box_domain((0, 0, 0), (1, 1, 1), (n, n, n))
    ops = FDOperators(d, heisenberg())
    phi = GridFunction.from_callable(d, lambda x, y, t: 2.0 + x * y * np.sin(np.pi * t))
    u = GridFunction.from_callable(
        d,
        lambda x, y, t: np.sin(np.pi * x) ** 2
        * np.sin(np.pi * y) ** 2
        * np.sin(np.pi * t) ** 2,
    )
    return best_of(repeats, lambda: friedrichs_identity(u, phi, ops, 2))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=65)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    n = args.points
    print(f"grid {n}^3 = {n**3} nodes; selected kernel backend: {KERNEL_BACKEND}")
    print()
    header = f"{'kernel case':24s} {'compiled':>12s} {'numpy':>12s} {'speedup':>9s}"
    print(header)
    print("-" * len(header))
    for label, t_cy, t_py in bench_kernel(n, args.repeats):
        if KERNEL_BACKEND == "cython":
            print(f"{label:24s} {t_cy*1e3:10.2f}ms {t_py*1e3:10.2f}ms {t_py/t_cy:8.2f}x")
        else:
            print(f"{label:24s} {'n/a':>12s} {t_py*1e3:10.2f}ms {'':>9s}")
    print()
    t_id = bench_identity(n, max(2, args.repeats // 2))
    print(
        f"end-to-end power-formula evaluation (order 2, heisenberg, {KERNEL_BACKEND} "
        f"backend): {t_id*1e3:.1f} ms"
    )


if __name__ == "__main__":
    main()
