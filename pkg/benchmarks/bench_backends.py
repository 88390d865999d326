#!/usr/bin/env python3
"""Time the numba and numpy kernels on the same inputs.

    python benchmarks/bench_backends.py [--points 20] [--repeat 3]
"""

import argparse
import time

import numpy as np

from cogsense import _kernels, generate_instance


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    insts = [generate_instance(seed, 16, 8, snr, 4)
             for seed in range(1, args.points + 1) for snr in (-10, 10, 30)]
    first = np.arange(8)
    rng = np.random.default_rng(0)
    subsets = [(inst, rng.choice(16, size=8, replace=False)) for inst in insts for _ in range(200)]

    backends = {"numpy": (_kernels.waterfill_level_numpy, _kernels.scan_subsets_numpy)}
    if _kernels.HAVE_NUMBA:
        backends["numba"] = (_kernels.waterfill_level_numba, _kernels.scan_subsets_numba)
        # compile before timing
        _kernels.waterfill_level_numba(insts[0].q[:3].copy(), insts[0].noise_var[:3].copy(), 1.0)
        _kernels.scan_subsets_numba(insts[0].q, insts[0].noise_var, 1.0, 8, first, 10)
    else:
        print("numba not installed; timing the numpy path only")

    print(f"{len(insts)} instances (N=16, L=8), {len(subsets)} single water-fills")
    print(f"{'backend':8s} {'exhaustive/inst ms':>20s} {'water-fill us':>15s}")
    results = {}
    for name, (level, scan) in backends.items():
        t_scan, caps = best_of(lambda: [scan(i.q, i.noise_var, i.power_budget, 8, first, 12870)[0]
                                        for i in insts], args.repeat)
        t_lvl, _ = best_of(lambda: [level(i.q[s].copy(), i.noise_var[s].copy(), i.power_budget)
                                    for i, s in subsets], args.repeat)
        results[name] = caps
        print(f"{name:8s} {1e3 * t_scan / len(insts):20.3f} {1e6 * t_lvl / len(subsets):15.2f}")
    if len(results) == 2:
        diff = np.max(np.abs(np.subtract(results["numpy"], results["numba"])))
        print(f"max capacity difference between backends: {diff:.3g}")


if __name__ == "__main__":
    main()
