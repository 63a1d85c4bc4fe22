"""The pure-numpy fallback must reproduce the accelerated kernels."""

import json
import os
import subprocess
import sys

import numpy as np

from colosim import backend
from colosim.channel.kernels import HISTORY, mix_loop, mix_numpy
from util import random_taps

SCRIPT = r"""
import json, sys
import numpy as np
sys.path.insert(0, sys.argv[1])
from colosim import backend
from colosim.channel import EngineConfig, create_engine
from util import random_taps, run_engine
gen = np.random.default_rng(0)
links = random_taps(gen, 4)
e = create_engine(EngineConfig(4, 1e6, 512, -30.0, 9))
e.set_taps(links)
x = gen.normal(size=(4, 2048)) + 1j * gen.normal(size=(4, 2048))
y = run_engine(e, x)
print(json.dumps({"backend": backend(), "re": y.real.ravel().tolist(), "im": y.imag.ravel().tolist()}))
"""


def _run(no_numba):
    env = dict(os.environ)
    env.pop("COLOSIM_NO_NUMBA", None)
    if no_numba:
        env["COLOSIM_NO_NUMBA"] = "1"
    tests_dir = os.path.dirname(__file__)
    out = subprocess.run([sys.executable, "-c", SCRIPT, tests_dir], env=env, check=True,
                         capture_output=True, text=True).stdout
    d = json.loads(out)
    return d["backend"], np.array(d["re"]) + 1j * np.array(d["im"])


def test_env_flag_selects_numpy_and_matches():
    name_np, y_np = _run(True)
    name_def, y_def = _run(False)
    assert name_np == "numpy"
    assert name_def == backend()
    assert np.allclose(y_np, y_def, rtol=0, atol=1e-12)


def test_mix_kernels_agree_in_process():
    gen = np.random.default_rng(1)
    n, b = 5, 300
    links = random_taps(gen, n)
    tap_k = np.zeros((n, n, 4), dtype=np.int64)
    tap_g = np.zeros((n, n, 4), dtype=np.complex128)
    tap_n = np.zeros((n, n), dtype=np.int64)
    for link in links:
        tap_n[link.tx, link.rx] = len(link.taps)
        for t, (k, g) in enumerate(link.taps):
            tap_k[link.tx, link.rx, t] = k
            tap_g[link.tx, link.rx, t] = g
    active = np.ones((n, n), dtype=np.bool_)
    x_ext = gen.normal(size=(n, HISTORY + b)) + 1j * gen.normal(size=(n, HISTORY + b))
    y1 = np.zeros((n, b), dtype=np.complex128)
    y2 = np.zeros((n, b), dtype=np.complex128)
    v1 = mix_loop(x_ext, tap_k, tap_g, tap_n, active, y1)
    v2 = mix_numpy(x_ext, tap_k, tap_g, tap_n, active, y2)
    assert v1 == v2
    assert np.allclose(y1, y2, rtol=0, atol=1e-12)
