"""Time the channel mix and noise kernels: numba loops vs pure numpy.

Run ``python benchmarks/bench_engine.py --nodes 16 --blocks 50``. With numba
missing (or ``COLOSIM_NO_NUMBA=1``) only the numpy column is meaningful.
"""

import argparse
import time

import numpy as np

from colosim import backend, rng
from colosim.channel.kernels import HISTORY, MAX_NONZERO_TAPS, mix_loop, mix_numpy


def random_taps(n, seed):
    gen = np.random.default_rng(seed)
    tap_n = gen.integers(1, MAX_NONZERO_TAPS + 1, size=(n, n))
    np.fill_diagonal(tap_n, 0)
    tap_k = np.zeros((n, n, MAX_NONZERO_TAPS), dtype=np.int64)
    tap_g = np.zeros((n, n, MAX_NONZERO_TAPS), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            m = tap_n[i, j]
            tap_k[i, j, :m] = np.sort(gen.choice(HISTORY + 1, m, replace=False))
            tap_g[i, j, :m] = gen.normal(size=m) + 1j * gen.normal(size=m)
    return tap_k, tap_g, tap_n.astype(np.int64), np.ones((n, n), dtype=np.bool_)


def bench(fn, reps):
    fn()  # warm-up / compile
    t = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t) / reps


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=16)
    ap.add_argument("--block", type=int, default=4096)
    ap.add_argument("--blocks", type=int, default=20)
    args = ap.parse_args()

    n, b = args.nodes, args.block
    tap_k, tap_g, tap_n, active = random_taps(n, 0)
    gen = np.random.default_rng(1)
    x_ext = gen.normal(size=(n, HISTORY + b)) + 1j * gen.normal(size=(n, HISTORY + b))
    y1 = np.zeros((n, b), dtype=np.complex128)
    y2 = np.zeros((n, b), dtype=np.complex128)

    def run_loop():
        y1[:] = 0
        mix_loop(x_ext, tap_k, tap_g, tap_n, active, y1)

    def run_np():
        y2[:] = 0
        mix_numpy(x_ext, tap_k, tap_g, tap_n, active, y2)

    t_loop = bench(run_loop, args.blocks)
    t_np = bench(run_np, args.blocks)
    err = np.max(np.abs(y1 - y2)) / np.max(np.abs(y2))
    msps = lambda t: n * b / t / 1e6  # noqa: E731
    print(f"backend in use: {backend()}  nodes={n} block={b}")
    print(f"mix    loop {t_loop * 1e3:8.2f} ms/block ({msps(t_loop):7.1f} MS/s aggregate)")
    print(f"mix    numpy {t_np * 1e3:7.2f} ms/block ({msps(t_np):7.1f} MS/s aggregate)")
    print(f"mix    max relative difference {err:.2e}")

    key = rng.stream_key(0, rng.DOMAIN_NOISE, 0)
    t_nl = bench(lambda: rng._noise_block_numba(key, 0, b, 1.0), args.blocks)
    t_nn = bench(lambda: rng._noise_block_numpy(key, 0, b, 1.0), args.blocks)
    print(f"noise  loop {t_nl * 1e6:8.1f} us/block")
    print(f"noise  numpy {t_nn * 1e6:7.1f} us/block")


if __name__ == "__main__":
    main()
