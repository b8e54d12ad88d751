#!/usr/bin/env python3
"""Benchmark the pure-Python vs compiled geometry kernels.

Runs the controller-verification workload (exit-edge and invariance
integrations over a full partition) against every importable backend and
prints a timing table.

    python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import random
import time

from polaris.kernels import _pure
from polaris.polar import Mode, PolarPartition, design_controller, region_bounds

try:
    from polaris.kernels import _ckernel
except ImportError:
    _ckernel = None


def sample_starts(rng, bounds, count):
    (r_lo, r_hi, th_lo, th_hi) = bounds
    starts = []
    for _ in range(count):
        r = r_lo + (0.1 + 0.8 * rng.random()) * (r_hi - r_lo)
        th = th_lo + (0.1 + 0.8 * rng.random()) * (th_hi - th_lo)
        import math

        starts.append((r * math.cos(th), r * math.sin(th)))
    return starts


def workload(backend, p, starts_per_cell, invariant_steps):
    rng = random.Random(42)
    speed = 2.0
    total_steps = 0
    for idx in p.regions():
        bounds = region_bounds(p, idx)
        span = bounds[3] - bounds[2]
        starts = sample_starts(rng, bounds, starts_per_cell)
        for mode in (Mode.EXIT_R_PLUS, Mode.EXIT_R_MINUS, Mode.EXIT_TH_PLUS,
                     Mode.EXIT_TH_MINUS, Mode.INVARIANT):
            if mode is Mode.EXIT_R_MINUS and idx.i == 1:
                continue
            vc = design_controller(p, idx, mode, speed)
            max_steps = invariant_steps if mode is Mode.INVARIANT else 20000
            results = backend.integrate_many(
                bounds[0], bounds[1], bounds[2], span, vc.flat(), starts,
                0.02, max_steps, p.r_eps,
            )
            total_steps += sum(r[1] for r in results)
    return total_steps


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workload")
    args = parser.parse_args()

    p = PolarPartition(50.0, 6, 9)
    starts = 10 if args.quick else 50
    inv_steps = 1000 if args.quick else 10000

    backends = [("pure", _pure)]
    if _ckernel is not None:
        backends.append(("compiled", _ckernel))
    else:
        print("compiled backend not built; benchmarking pure only")

    timings = {}
    for name, backend in backends:
        t0 = time.perf_counter()
        steps = workload(backend, p, starts, inv_steps)
        elapsed = time.perf_counter() - t0
        timings[name] = (elapsed, steps)
        print(f"{name:>9}: {elapsed:8.3f} s   {steps:>12,} integration steps "
              f"({steps / elapsed / 1e6:.2f} Msteps/s)")
    if len(timings) == 2:
        speedup = timings["pure"][0] / timings["compiled"][0]
        print(f"{'speedup':>9}: {speedup:8.1f}x")


if __name__ == "__main__":
    main()
