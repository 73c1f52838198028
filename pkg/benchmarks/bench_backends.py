"""Timing comparison of the two backend lanes on the hot kernels.

Runs each lane in a child process (the lane is fixed at import time by
BVODE_BACKEND), warms the jit cache before any clock starts, and prints
a side-by-side table.  Usage:

    python3 benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time

HERE = os.path.abspath(__file__)


def build_cases():
    import numpy as np

    from bvode import BVFunction, ScalarField, backend, get_profile, solve_offset

    drv = BVFunction.from_segments(
        [0.0, 0.5, 1.0], [[0.0, 2.0], [1.0, 0.0, -4.0]],
        jumps=((0.25, 1.5), (0.75, -0.5)))
    fld = ScalarField.bounded_tanh(1.0, 1.0, offset=0.2)
    prof = get_profile("triangular")
    ts = np.linspace(0.0, 1.0, 200_001)
    dLn = np.diff(backend.driver_lattice_values(ts, 256, prof, drv))
    s_grid = np.linspace(0.0, 1.0, 200_001)
    L_grid = drv(s_grid)

    # tanh keeps euler on the generic recursion, not the affine fast path
    return {
        "driver_lattice (200k pts)":
            lambda: backend.driver_lattice_values(ts, 256, prof, drv),
        "euler_exact (200k steps)":
            lambda: backend.euler_exact(fld, 0.0, 1.0 / 200_000, dLn, 1.0),
        "flow_mass (10k rk4 steps)":
            lambda: backend.flow_mass(fld, 0.3, 1.0, 1e-4),
        "heun_path (200k pts)":
            lambda: backend.heun_path(fld, s_grid, L_grid, 1.0),
        "solve_offset (n=256, 66k steps)":
            lambda: solve_offset(fld, drv, prof, 256, 256.0 ** -2, 0.0, 1.0),
    }


def run_lane(repeat):
    from bvode import backend

    backend.warmup()
    cases = build_cases()
    for fn in cases.values():
        fn()  # one untimed pass so caches and allocators settle
    out = {"lane": "numba" if backend.USING_NUMBA else "numpy", "times": {}}
    for name, fn in cases.items():
        best = min(_clock(fn) for _ in range(repeat))
        out["times"][name] = best
    json.dump(out, sys.stdout)


def _clock(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--lane", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.lane:
        run_lane(args.repeat)
        return

    results = {}
    for lane in ("numpy", "numba"):
        env = dict(os.environ, BVODE_BACKEND=lane)
        proc = subprocess.run(
            [sys.executable, HERE, "--lane", lane, "--repeat", str(args.repeat)],
            capture_output=True, text=True, env=env)
        if proc.returncode != 0:
            print(f"{lane} lane unavailable:\n{proc.stderr.strip()}")
            continue
        results[lane] = json.loads(proc.stdout)["times"]

    if not results:
        return
    names = list(next(iter(results.values())))
    width = max(len(n) for n in names)
    header = f"{'kernel':<{width}}" + "".join(
        f"{lane + ' (ms)':>14}" for lane in results)
    if len(results) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name in names:
        row = f"{name:<{width}}"
        for lane in results:
            row += f"{results[lane][name] * 1e3:>14.3f}"
        if len(results) == 2:
            row += f"{results['numpy'][name] / results['numba'][name]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
