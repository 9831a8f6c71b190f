#!/usr/bin/env python3
"""Benchmark the compiled closed-loop kernel against the pure-Python one.

Times the raw engine (run_loop) on each built-in preset for both backends
and reports per-step cost and speedup, then end-to-end run_scenario times
for context. Backends are bit-identical (asserted); only speed differs.

    python benchmarks/bench_kernel.py [--repeats N]
"""

import argparse
import time

import numpy as np

from relayesc import HAVE_COMPILED, get_backend, presets, run_scenario
from relayesc.harness import engine_inputs


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not HAVE_COMPILED:
        print("compiled kernel not built; run 'pip install -e . --no-build-isolation' first")
        return 1

    py = get_backend("python")
    cy = get_backend("cython")

    print("raw kernel (run_loop only):")
    print(f"{'preset':<16} {'steps':>7} {'python/step':>12} {'cython/step':>12} {'speedup':>9}")
    for name in sorted(presets.PRESETS):
        scenario = presets.get_preset(name)
        eng_args, _, _ = engine_inputs(scenario, seed=0)
        n = scenario.n_steps + 1
        t_py = time_call(lambda: py.run_loop(*eng_args), args.repeats)
        t_cy = time_call(lambda: cy.run_loop(*eng_args), args.repeats)
        print(
            f"{name:<16} {n:>7} {t_py * 1e6 / n:>9.2f} us {t_cy * 1e6 / n:>9.2f} us "
            f"{t_py / t_cy:>8.1f}x"
        )

        rp, _ = run_scenario(scenario, seed=0, backend="python")
        rc, _ = run_scenario(scenario, seed=0, backend="cython")
        assert np.array_equal([r.theta for r in rp], [r.theta for r in rc]), name

    print("\nend to end (run_scenario, includes records and metrics):")
    print(f"{'preset':<16} {'python':>12} {'cython':>12} {'speedup':>9}")
    for name in sorted(presets.PRESETS):
        scenario = presets.get_preset(name)
        t_py = time_call(lambda: run_scenario(scenario, seed=0, backend="python"), args.repeats)
        t_cy = time_call(lambda: run_scenario(scenario, seed=0, backend="cython"), args.repeats)
        print(f"{name:<16} {t_py * 1e3:>9.1f} ms {t_cy * 1e3:>9.1f} ms {t_py / t_cy:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
