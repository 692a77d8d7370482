"""Compiled vs pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--N 4000] [--repeat 3]

Times the hot kernels of both backends on the same inputs and checks that
they agree.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from magdirac._backend import get_kernels
from magdirac.fields import FieldProfile, radial_gauge
from magdirac.radial_solver import RadialGrid, build_channel


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=4000, help="radial nodes per channel")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    try:
        fast = get_kernels("compiled")
    except ImportError:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return
    slow = get_kernels("python")

    grid = RadialGrid(12.0, args.N)
    gauge = radial_gauge(FieldProfile.step_well(1.0, -0.5, 2.0), grid.r)
    d, off = build_channel(2, gauge, grid).tridiagonal()
    rhs = np.random.default_rng(0).standard_normal(d.size)

    cases = [
        ("sturm_count", lambda k: k.sturm_count(d, off, 1.234)),
        ("bisect (-3, 3)", lambda k: k.bisect_eigenvalues(d, off, -3.0, 3.0, 1e-13)),
        ("bisect (-20, 20)", lambda k: k.bisect_eigenvalues(d, off, -20.0, 20.0, 1e-13)),
        ("solve_shifted", lambda k: k.solve_shifted(d, off, 1.1, rhs)),
        ("hyperu_integral x200", lambda k: [k.hyperu_integral(0.5, 1.0, x) for x in np.linspace(0.01, 40, 200)]),
    ]
    print(f"n = {d.size} (tridiagonal), best of {args.repeat}")
    print(f"{'kernel':<22}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}{'max diff':>12}")
    for name, fn in cases:
        tf, of = _best(lambda: fn(fast), args.repeat)
        ts, os_ = _best(lambda: fn(slow), args.repeat)
        a = np.atleast_1d(np.asarray(of, dtype=float)).ravel()
        b = np.atleast_1d(np.asarray(os_, dtype=float)).ravel()
        diff = float(np.max(np.abs(a - b))) if a.size == b.size and a.size else float("nan")
        print(f"{name:<22}{tf:>14.4g}{ts:>14.4g}{ts / tf:>10.1f}{diff:>12.3g}")


if __name__ == "__main__":
    main()
