#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-Python fallback.

Runs each hot kernel on identical inputs with both backends, reports
throughput and speedup, and double-checks that the outputs agree bitwise.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --samples 2000000 --repeat 5
"""

import argparse
import time

import numpy as np

from sdneuro import _kernels_py as py

try:
    from sdneuro import _kernels as cy
except ImportError:
    cy = None

DT = 1e-6


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def bench_lpf(backend, x, repeat):
    return timed(lambda: backend.lpf_run(x, 0.0, DT, 1.0, 2e-3), repeat)


def bench_sd(backend, x, repeat):
    return timed(
        lambda: backend.sd_run(x, DT, 1.0, 2e-3, 1.0, 10e-3, 1.0, 0.0, 100, 100.0,
                               0.0, 0.0, 0, 0),
        repeat,
    )


def bench_adex(backend, x, repeat):
    return timed(
        lambda: backend.adex_run(x, DT, 0.0, 0.0, 0.1, 1.0, 2e-3, 1.0, 10e-3, 0.0,
                                 5.0, 0.0, 0.0, 0),
        repeat,
    )


def bench_nodes(backend, n_nodes, n_steps, repeat):
    drive = np.linspace(20.0, 80.0, n_nodes)

    def run():
        imem = np.zeros(n_nodes)
        s = np.zeros(n_nodes)
        pulse = np.zeros(n_nodes, dtype=np.int64)
        counts = np.zeros(n_nodes, dtype=np.int64)
        s_sum = np.zeros(n_nodes)
        backend.sd_run_const_nodes(drive, imem, s, pulse, counts, s_sum, n_steps,
                                   1e-5, 10.0, 2e-3, 1.0, 10e-3, 1.0, 0.0, 10, 100.0)
        return counts.copy(), s_sum.copy()

    return timed(run, repeat)


def equal(a, b):
    if isinstance(a, tuple):
        return all(equal(u, v) for u, v in zip(a, b))
    if a is None or b is None:
        return a is b
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1_000_000,
                    help="input length for the trace kernels")
    ap.add_argument("--nodes", type=int, default=50, help="bank width for the node kernel")
    ap.add_argument("--node-steps", type=int, default=20_000,
                    help="steps per node for the bank kernel")
    ap.add_argument("--repeat", type=int, default=3, help="take the best of N runs")
    args = ap.parse_args()

    if cy is None:
        print("compiled extension not available; showing the fallback alone")

    rng = np.random.default_rng(0)
    x = 50.0 + 20.0 * rng.standard_normal(args.samples)
    np.clip(x, 0.0, None, out=x)

    cases = [
        ("lpf_run", lambda b: bench_lpf(b, x, args.repeat), args.samples),
        ("sd_run", lambda b: bench_sd(b, x, args.repeat), args.samples),
        ("adex_run", lambda b: bench_adex(b, x, args.repeat), args.samples),
        ("sd_run_const_nodes",
         lambda b: bench_nodes(b, args.nodes, args.node_steps, args.repeat),
         args.nodes * args.node_steps),
    ]

    print(f"{'kernel':<20} {'python':>12} {'cython':>12} {'speedup':>9}   steps/s (cython)")
    for name, run, steps in cases:
        out_py, t_py = run(py)
        if cy is None:
            print(f"{name:<20} {t_py * 1e3:>10.1f}ms {'-':>12} {'-':>9}")
            continue
        out_cy, t_cy = run(cy)
        mark = "" if equal(out_py, out_cy) else "  RESULTS DIFFER"
        print(
            f"{name:<20} {t_py * 1e3:>10.1f}ms {t_cy * 1e3:>10.1f}ms "
            f"{t_py / t_cy:>8.1f}x   {steps / t_cy:>.3g}{mark}"
        )


if __name__ == "__main__":
    main()
