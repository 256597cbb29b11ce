"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with best-of-N wall times, the speedup and the
max deviation between the two backends.
"""
import argparse
import time

import numpy as np

from realdet import _kernels
from realdet.fourier_analytic import grid_angles


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    modes = np.arange(-8, 9, dtype=float)
    coeffs = (rng.normal(size=17) + 1j * rng.normal(size=17)) * np.exp(-np.abs(modes))
    dcoeffs = 1j * modes * coeffs
    z = (grid_angles(128)[:, None] + 1j * np.linspace(0, 1, 129)[None, :]).ravel()
    z0 = grid_angles(256).astype(np.complex128)
    yield "series  256x129 points, 17 modes", (
        lambda: _kernels.np_series(modes, coeffs, z),
        lambda: _kernels.nb_series(modes, coeffs, z))
    yield "flow    256 points, 200 RK4 steps", (
        lambda: _kernels.np_flow(modes, coeffs * 0.1, dcoeffs * 0.1, 0.05, 200, z0)[0],
        lambda: _kernels.nb_flow(modes, coeffs * 0.1, dcoeffs * 0.1, 0.05, 200, z0)[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled (REALDET_NO_NUMBA); nothing to compare")
        return
    print(f"{'kernel':38s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s} {'max dev':>9s}")
    for name, (np_fn, nb_fn) in cases():
        nb_fn()  # compile outside the timing
        t_np, a = best_of(np_fn, args.repeat)
        t_nb, b = best_of(nb_fn, args.repeat)
        dev = float(np.max(np.abs(a - b)))
        print(f"{name:38s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f} {dev:9.1e}")


if __name__ == "__main__":
    main()
