"""Counter-based random numbers.

Every draw is a pure function of ``(key, counter)`` where the key is derived
from a 64-bit seed plus stream ids. Nothing is carried between calls, so a
block of noise for samples ``[t0, t0 + B)`` is identical however the timeline
is cut into blocks, and skipped spans cost nothing.

The mixer is the splitmix64 finalizer.
"""

import math

import numpy as np

from ._numba import HAVE_NUMBA, njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# stream domains keep unrelated consumers from sharing draws
DOMAIN_NOISE = 1
DOMAIN_PN = 2
DOMAIN_TRAFFIC = 3
DOMAIN_FADING = 4
DOMAIN_ASSIGN = 5

_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_U_30 = np.uint64(30)
_U_27 = np.uint64(27)
_U_31 = np.uint64(31)
_U_11 = np.uint64(11)
_U_1 = np.uint64(1)
_U_2 = np.uint64(2)
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


def mix64(z):
    """splitmix64 finalizer on a python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed, *ids):
    """Derive a 64-bit key from a seed and any number of non-negative ids."""
    k = mix64(int(seed) & MASK64)
    for i in ids:
        k = mix64(k ^ (((int(i) + 1) * GOLDEN) & MASK64))
    return k


def _mix_np(z):
    z = (z ^ (z >> _U_30)) * _U_M1
    z = (z ^ (z >> _U_27)) * _U_M2
    return z ^ (z >> _U_31)


def hash_counters(key, counters):
    """uint64 hash of each counter under ``key`` (numpy, vectorised)."""
    c = np.asarray(counters, dtype=np.uint64)
    return _mix_np(np.uint64(key) ^ _mix_np(c))


def uniform(key, counters):
    """Uniform doubles in [0, 1), one per counter."""
    return (hash_counters(key, counters) >> _U_11).astype(np.float64) * _INV53


def std_complex_normal(key, counters):
    """Circular complex normals with unit total variance, one per counter.

    Box-Muller on the counter pair ``(2c, 2c + 1)``.
    """
    c = np.asarray(counters, dtype=np.uint64)
    h1 = hash_counters(key, c * _U_2)
    h2 = hash_counters(key, c * _U_2 + _U_1)
    u1 = ((h1 >> _U_11) + _U_1).astype(np.float64) * _INV53
    u2 = (h2 >> _U_11).astype(np.float64) * _INV53
    r = np.sqrt(-np.log(u1))  # sqrt(-2 ln u) * sqrt(1/2)
    ang = _TWO_PI * u2
    return r * np.cos(ang) + 1j * (r * np.sin(ang))


def _noise_block_numpy(key, start, count, sigma):
    return sigma * std_complex_normal(key, np.arange(start, start + count, dtype=np.uint64))


@njit(cache=True)
def _mix_nb(z):
    z = (z ^ (z >> _U_30)) * _U_M1
    z = (z ^ (z >> _U_27)) * _U_M2
    return z ^ (z >> _U_31)


@njit(cache=True)
def _noise_block_loop(key, start, count, sigma, out):
    k = np.uint64(key)
    for i in range(count):
        c = np.uint64(start + i)
        h1 = _mix_nb(k ^ _mix_nb(c * _U_2))
        h2 = _mix_nb(k ^ _mix_nb(c * _U_2 + _U_1))
        u1 = float((h1 >> _U_11) + _U_1) * _INV53
        u2 = float(h2 >> _U_11) * _INV53
        r = math.sqrt(-math.log(u1))
        ang = _TWO_PI * u2
        out[i] = complex(sigma * (r * math.cos(ang)), sigma * (r * math.sin(ang)))


def _noise_block_numba(key, start, count, sigma):
    out = np.empty(count, dtype=np.complex128)
    _noise_block_loop(np.uint64(key), start, count, sigma, out)
    return out


def noise_block(key, start, count, sigma):
    """``sigma`` times unit complex normals for counters ``start .. start+count-1``."""
    if HAVE_NUMBA:
        return _noise_block_numba(key, int(start), int(count), float(sigma))
    return _noise_block_numpy(key, int(start), int(count), float(sigma))


def pn_chips(seed, stream, length):
    """Real +-1 chip sequence of ``length`` drawn from the PN domain."""
    key = stream_key(seed, DOMAIN_PN, stream)
    bits = hash_counters(key, np.arange(length, dtype=np.uint64)) >> np.uint64(63)
    return 1.0 - 2.0 * bits.astype(np.float64)
