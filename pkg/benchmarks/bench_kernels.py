#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the pure NumPy fallback.

Times the individual kernels on representative series lengths and the full
transform catalogs end to end (the realistic workload: one call per sample
per transform inside the training loop).

Usage:
    python benchmarks/bench_kernels.py [--length 240] [--repeats 2000]
"""

import argparse
import time

import numpy as np

from adaptaug import kernels
from adaptaug.rng import RngStream
from adaptaug.transforms import TimeSeries, apply, fixed_catalog, magnitude_catalog


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        for _ in range(repeats):
            fn()
        best = min(best, (time.perf_counter() - start) / repeats)
    return best


def kernel_cases(length, gen):
    series = gen.normal(0, 1, length)
    knots = gen.normal(1, 0.2, 6)
    hann = np.hanning(7)
    hann /= hann.sum()
    xp = np.sort(gen.uniform(0, length - 1, length))
    xp[0], xp[-1] = 0.0, length - 1.0
    queries = np.arange(length, dtype=float)
    return [
        ("resample_linear", lambda: kernels.resample_linear(series, length)),
        ("interp_linear", lambda: kernels.interp_linear(xp, series, queries)),
        ("natural_cubic_curve", lambda: kernels.natural_cubic_curve(knots, length)),
        ("pool_average", lambda: kernels.pool_average(series, 3)),
        ("quantize_uniform", lambda: kernels.quantize_uniform(series, 25)),
        ("convolve_reflect", lambda: kernels.convolve_reflect(series, hann)),
    ]


def catalog_cases(length, gen):
    sample = TimeSeries(gen.normal(0, 1, length))
    fixed = fixed_catalog()
    tunable = magnitude_catalog(10)

    def run_catalog(specs):
        root = RngStream(42)
        for j, spec in enumerate(specs):
            apply(spec, sample, root.child(j))

    return [
        ("fixed catalog (11 transforms)", lambda: run_catalog(fixed)),
        ("magnitude catalog (9 transforms)", lambda: run_catalog(tunable)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--length", type=int, default=240)
    parser.add_argument("--repeats", type=int, default=2000)
    parser.add_argument("--catalog-repeats", type=int, default=200)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not available; nothing to compare")

    gen = np.random.default_rng(7)
    rows = []
    for name, fn in kernel_cases(args.length, gen):
        timings = {}
        for backend in backends:
            kernels.set_backend(backend)
            timings[backend] = time_call(fn, args.repeats)
        rows.append((name, timings))
    for name, fn in catalog_cases(args.length, gen):
        timings = {}
        for backend in backends:
            kernels.set_backend(backend)
            timings[backend] = time_call(fn, args.catalog_repeats)
        rows.append((name, timings))
    kernels.set_backend(backends[-1] if "cython" not in backends else "cython")

    width = max(len(name) for name, _ in rows)
    print(f"\nseries length {args.length}, best of 3 runs\n")
    header = f"{'case':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, timings in rows:
        line = f"{name:<{width}}  "
        for backend in backends:
            line += f"{timings[backend] * 1e6:>10.2f}us"
        if len(backends) == 2:
            line += f"{timings['python'] / timings['cython']:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
