#!/usr/bin/env python3
"""Benchmark the LCS kernels: numba JIT path vs pure-numpy fallback.

Times the length-only kernel and the full-table + backtrack path on
sequence sizes typical for this pipeline (dialogues ~1300 tokens, notes
~500). Run directly:

    python benchmarks/bench_kernels.py

Force one backend for the in-process numbers with MEDIPIPE_KERNELS=numpy;
this script measures both by re-importing the module per backend.
"""

from __future__ import annotations

import importlib
import os
import sys
import time

import numpy as np

SIZES = [(100, 100), (500, 490), (1302, 490), (2000, 2000)]
REPEATS = 5


def _load_kernels(backend: str):
    os.environ["MEDIPIPE_KERNELS"] = backend
    import medipipe.kernels as kernels

    importlib.reload(kernels)
    return kernels


def _time(fn, *args) -> float:
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(backend: str) -> dict[tuple[int, int], tuple[float, float]]:
    kernels = _load_kernels(backend)
    if kernels.backend_name() != backend:
        print(f"  (backend {backend} unavailable, got {kernels.backend_name()})", file=sys.stderr)
    kernels.warmup()
    rng = np.random.default_rng(7)
    results = {}
    for n, m in SIZES:
        a = rng.integers(0, 50, size=n).astype(np.int64)
        b = rng.integers(0, 50, size=m).astype(np.int64)
        length_t = _time(kernels.lcs_length, a, b)
        mask_t = _time(kernels.lcs_match_mask, a, b)
        results[(n, m)] = (length_t, mask_t)
    return results


def main() -> None:
    numpy_res = bench_backend("numpy")
    numba_res = bench_backend("numba")
    header = f"{'size':>12}  {'numpy len':>10}  {'numba len':>10}  {'speedup':>8}  {'numpy mask':>11}  {'numba mask':>11}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for size in SIZES:
        np_len, np_mask = numpy_res[size]
        nb_len, nb_mask = numba_res[size]
        print(
            f"{size[0]}x{size[1]:>6}  {np_len * 1e3:>8.2f}ms  {nb_len * 1e3:>8.2f}ms  {np_len / nb_len:>7.1f}x"
            f"  {np_mask * 1e3:>9.2f}ms  {nb_mask * 1e3:>9.2f}ms  {np_mask / nb_mask:>7.1f}x"
        )


if __name__ == "__main__":
    main()
