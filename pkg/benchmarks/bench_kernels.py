"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from multibin import _kernels_py

try:
    from multibin import _kernels as compiled
except ImportError:
    compiled = None


def cases(rng):
    # FluSight-sized grids: 131 wILI bins with d=5, 34 week bins with d=1
    out = []
    for T, d in ((141, 5), (36, 1), (1000, 5)):
        f = np.zeros(T)
        f[d : T - d] = rng.dirichlet(np.ones(T - 2 * d))
        g0 = np.zeros(T)
        g0[d : T - d] = 1.0 / (T - 2 * d)
        out.append((T, d, f, g0))
    return out


def bench(impl, f, g0, d, repeat):
    T = f.size
    ws = min(timeit.repeat(lambda: impl.window_sum(f, d), number=200, repeat=repeat)) / 200
    em = min(
        timeit.repeat(lambda: impl.em_solve(f, g0, d, d, T - d, 200, 0.0, False), number=1, repeat=repeat)
    )
    return ws, em


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(1)
    impls = [("python", _kernels_py)] + ([("cython", compiled)] if compiled else [])
    print(f"{'T':>5} {'d':>2} {'backend':>8} {'window_sum us':>14} {'200 EM steps ms':>16}")
    for T, d, f, g0 in cases(rng):
        base = None
        for name, impl in impls:
            ws, em = bench(impl, f, g0, d, args.repeat)
            speed = "" if base is None else f"  ({base / em:.1f}x)"
            base = em if base is None else base
            print(f"{T:>5} {d:>2} {name:>8} {ws * 1e6:>14.2f} {em * 1e3:>16.2f}{speed}")
    if compiled is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
