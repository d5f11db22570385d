#!/usr/bin/env python3
"""Benchmark the compiled coin-step kernel against the numpy fallback.

Times a full n-step evolution from a point start for a few step counts and
prints per-backend wall times plus the speedup.  Run after building the
extension (``pip install -e . --no-build-isolation``):

    python bench/bench_kernels.py
"""

import time

import numpy as np

from qwlab import _step_numpy
from qwlab.walk import hadamard_coin

try:
    from qwlab import _step_kernel
except ImportError:
    _step_kernel = None


def run_backend(kernel, n: int) -> float:
    coin = hadamard_coin().matrix()
    L = 2 * n + 3
    amps = np.zeros((2, L), dtype=np.complex128)
    amps[0, n + 1] = 1.0
    t0 = time.perf_counter()
    kernel.evolve_steps(amps, coin, n, n + 1, n + 1)
    elapsed = time.perf_counter() - t0
    norm = float(np.sum(np.abs(amps) ** 2))
    assert abs(norm - 1.0) < 1e-10, "evolution lost norm"
    return elapsed


def main() -> None:
    print(f"{'n':>7}  {'numpy [s]':>10}  {'compiled [s]':>12}  {'speedup':>8}")
    for n in (1024, 4096, 8192, 16384):
        t_np = min(run_backend(_step_numpy, n) for _ in range(3))
        if _step_kernel is None:
            print(f"{n:>7}  {t_np:>10.4f}  {'(not built)':>12}  {'-':>8}")
            continue
        t_cy = min(run_backend(_step_kernel, n) for _ in range(3))
        print(f"{n:>7}  {t_np:>10.4f}  {t_cy:>12.4f}  {t_np / t_cy:>7.2f}x")


if __name__ == "__main__":
    main()
