"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
The active backend for the package itself is chosen at import time from the
RISLOC_NUMBA environment variable; this script times both explicitly.
"""
import math
import time

import numpy as np

from risloc._kernels import implementations

C = 299_792_458.0


def timeit(fn, *args, repeat=5, warmup=1):
    for _ in range(warmup):
        fn(*args)
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    n_freq, n_pos = 201, 9
    values = np.ascontiguousarray(
        rng.standard_normal((n_freq, n_pos)) + 1j * rng.standard_normal((n_freq, n_pos))
    )
    rel_freqs = np.ascontiguousarray(np.arange(n_freq) * 10e6)
    rx = rng.uniform(-5e-3, 5e-3, (n_pos, 2))
    rx_x, rx_y = np.ascontiguousarray(rx[:, 0]), np.ascontiguousarray(rx[:, 1])
    wavenumber = 2 * math.pi * 28e9 / C
    taus = np.ascontiguousarray(np.arange(0.0, 1e-7, 0.25e-9))
    steer = np.ascontiguousarray(np.exp(-1j * rng.uniform(0, 2 * math.pi, (360, n_pos))))
    xs = np.arange(2.5, 12.5, 0.01)
    ys = np.arange(4.5, 13.5, 0.01)
    kinds = np.array([0, 0, 1, 1], dtype=np.int64)
    ax = np.array([6.06, 4.0, 6.06, 4.0])
    ay = np.array([11.6, 8.6, 11.6, 8.6])
    bore = np.radians(np.array([-90.0, 0.0, 0.0, 0.0]))
    leg = np.array([0.0, 0.0, 0.0, 3.64])
    value = np.array([0.5, 0.4, 2.0, 7.0])
    weight = np.ones(4)

    cases = {
        "mpc_correlation": (values, rel_freqs, rx_x, rx_y, wavenumber, 3e-8, 0.5),
        "component_polish": (values, rel_freqs, rx_x, rx_y, wavenumber, 3e-8, 0.5,
                             2.5e-10, 0.026, 3, 1e-12, 1.7e-5),
        "delay_power_profile": (values, rel_freqs, taus),
        "angle_power_scan": (values, rel_freqs, 3e-8, steer),
        "grid_objective_min": (xs, ys, kinds, ax, ay, bore, leg, value, weight),
    }
    impls = implementations()
    print(f"{'kernel':<22}" + "".join(f"{name:>12}" for name in sorted(impls)) + f"{'speedup':>10}")
    for kernel, args in cases.items():
        times = {name: timeit(funcs[kernel], *args) for name, funcs in impls.items()}
        row = f"{kernel:<22}"
        for name in sorted(times):
            row += f"{times[name] * 1e3:>10.2f}ms"
        if "numba" in times and "numpy" in times:
            row += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
