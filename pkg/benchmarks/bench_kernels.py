"""Compare the compiled kernels against the pure-Python fallback.

Backend selection happens at import time, so each backend runs in its own
subprocess: the parent launches this script twice with ``--worker``, once
with HYBRIDAMM_NO_NUMBA=1 and once without, then checks that both backends
produced the same numbers (rel 1e-12) and reports the speedup.

    python benchmarks/bench_kernels.py [--grid-points N] [--steps N] [--repeat N]
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time

import numpy as np


def bench_curve_grid(kernels, grid_points, repeat):
    z_values = (0.0, 0.3, 0.6, 0.9)
    xs = np.linspace(0.2, 1.8, grid_points)
    sums = []
    best = math.inf
    for _ in range(repeat):
        start = time.perf_counter()
        total = 0.0
        for z in z_values:
            k = kernels.curve_anchor(1.0, 1.0, 1.0, z)
            total += float(np.nansum(kernels.curve_grid(k, 1.0, z, xs)))
        best = min(best, time.perf_counter() - start)
        sums.append(total)
    return best, sums[-1]


def bench_run_steps(kernels, steps, repeat):
    rng = np.random.Generator(np.random.PCG64(1234))
    log_returns = 0.02 * rng.standard_normal(steps)
    # clip keeps arbitrary-length paths inside a sane, strictly positive band
    prices = np.exp(np.clip(np.cumsum(log_returns), -5.0, 5.0))
    prices[0] = 1.0
    trades_per_step = 2
    noise_frac = np.exp(-3.0 + 0.8 * rng.standard_normal(steps * trades_per_step))
    noise_dir = rng.integers(0, 2, steps * trades_per_step)
    best = math.inf
    checksum = 0.0
    for _ in range(repeat):
        start = time.perf_counter()
        arrays = kernels.run_steps(1.0, 1.0, 0.6, prices, True, noise_frac,
                                   noise_dir, trades_per_step, 0.25)
        best = min(best, time.perf_counter() - start)
        checksum = sum(float(np.sum(a)) for a in arrays[:8]) + arrays[8] + arrays[9]
    return best, checksum


def worker(args):
    from hybridamm import _kernels

    # throwaway pass so jit compilation never lands in a timed run
    bench_curve_grid(_kernels, 64, 1)
    bench_run_steps(_kernels, 64, 1)

    grid_s, grid_sum = bench_curve_grid(_kernels, args.grid_points, args.repeat)
    steps_s, steps_sum = bench_run_steps(_kernels, args.steps, args.repeat)
    print(json.dumps({
        "backend": "numba" if _kernels.NUMBA_ENABLED else "pure",
        "curve_grid_s": grid_s,
        "run_steps_s": steps_s,
        "curve_grid_sum": grid_sum,
        "run_steps_sum": steps_sum,
    }))


def launch(args, disable_numba):
    env = dict(os.environ)
    if disable_numba:
        env["HYBRIDAMM_NO_NUMBA"] = "1"
    else:
        env.pop("HYBRIDAMM_NO_NUMBA", None)
    command = [sys.executable, os.path.abspath(__file__), "--worker",
               "--grid-points", str(args.grid_points), "--steps", str(args.steps),
               "--repeat", str(args.repeat)]
    result = subprocess.run(command, env=env, capture_output=True, text=True, check=True)
    return json.loads(result.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    parser.add_argument("--grid-points", type=int, default=1_000_000)
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    if args.worker:
        worker(args)
        return 0

    pure = launch(args, disable_numba=True)
    fast = launch(args, disable_numba=False)

    for key in ("curve_grid_sum", "run_steps_sum"):
        gap = abs(pure[key] - fast[key])
        if gap > 1e-12 * max(abs(pure[key]), abs(fast[key])):
            print(f"backend mismatch on {key}: pure={pure[key]!r} {fast['backend']}={fast[key]!r}")
            return 1

    print(f"backends agree (rel 1e-12); timings are best of {args.repeat}\n")
    print(f"{'workload':<14} {'pure (s)':>10} {fast['backend'] + ' (s)':>12} {'speedup':>9}")
    for label, key in (("curve_grid", "curve_grid_s"), ("run_steps", "run_steps_s")):
        ratio = pure[key] / fast[key]
        print(f"{label:<14} {pure[key]:>10.4f} {fast[key]:>12.4f} {ratio:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
