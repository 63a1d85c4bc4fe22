"""Sparse FIR mixing kernels.

Both variants share one summation order so they agree to the last bit on
IEEE hardware: for every receiver ``j`` the per-link contribution
``sum_t g_t * x_i[n - k_t]`` is formed with taps ascending, then added to the
receiver accumulator with transmitters ascending.

``x_ext`` is ``(N, HISTORY + B)``: the 511 previous samples of every
transmitter followed by the current block.
"""

import numpy as np

from .._numba import HAVE_NUMBA, njit

N_TAP_SLOTS = 512
HISTORY = N_TAP_SLOTS - 1
MAX_NONZERO_TAPS = 4


@njit(cache=True)
def mix_loop(x_ext, tap_k, tap_g, tap_n, active, y):
    n_nodes, b = y.shape
    visits = 0
    for j in range(n_nodes):
        for i in range(n_nodes):
            m = tap_n[i, j]
            if i == j or m == 0 or not active[i, j]:
                continue
            for n in range(b):
                base = HISTORY + n
                acc = tap_g[i, j, 0] * x_ext[i, base - tap_k[i, j, 0]]
                for t in range(1, m):
                    acc += tap_g[i, j, t] * x_ext[i, base - tap_k[i, j, t]]
                y[j, n] += acc
            visits += m * b
    return visits


def mix_numpy(x_ext, tap_k, tap_g, tap_n, active, y):
    n_nodes, b = y.shape
    visits = 0
    for j in range(n_nodes):
        for i in range(n_nodes):
            m = int(tap_n[i, j])
            if i == j or m == 0 or not active[i, j]:
                continue
            s = HISTORY - int(tap_k[i, j, 0])
            acc = tap_g[i, j, 0] * x_ext[i, s:s + b]
            for t in range(1, m):
                s = HISTORY - int(tap_k[i, j, t])
                acc = acc + tap_g[i, j, t] * x_ext[i, s:s + b]
            y[j] += acc
            visits += m * b
    return visits


mix = mix_loop if HAVE_NUMBA else mix_numpy
