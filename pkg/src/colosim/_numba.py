"""Numba shim.

Set ``COLOSIM_NO_NUMBA=1`` to force the pure-numpy kernels. When numba is
missing or disabled, ``njit`` is a no-op decorator so the loop kernels still
import (and run, slowly) as plain Python.
"""

import os

NUMBA_DISABLED = os.environ.get("COLOSIM_NO_NUMBA", "").strip() not in ("", "0")

try:
    if NUMBA_DISABLED:
        raise ImportError("disabled via COLOSIM_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
