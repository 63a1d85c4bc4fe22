"""Shared builders and independent oracles for the test suite."""

import math

import numpy as np

from colosim.channel import CirTaps, EngineConfig, create_engine
from colosim.radio import MAX_PAYLOAD, ModemRx, modem_tx
from colosim.scenario import RfScenario, TapUpdate


def identity_links(n, gain=1.0):
    return tuple(CirTaps(i, j, ((0, gain),)) for i in range(n) for j in range(n) if i != j)


def identity_scenario(n=2, duration_ms=10_000, fs=1e6, noise=-math.inf, sid="identity"):
    return RfScenario(sid, n, duration_ms, float(fs), 1e9, noise, (TapUpdate(0, identity_links(n)),))


def random_taps(gen, n, max_k=511, density=1.0):
    """Random sparse taps for every directed pair (some pairs left silent)."""
    links = []
    for i in range(n):
        for j in range(n):
            if i == j or gen.random() > density:
                continue
            m = int(gen.integers(1, 5))
            ks = np.sort(gen.choice(max_k + 1, m, replace=False))
            gs = gen.normal(size=m) + 1j * gen.normal(size=m)
            links.append(CirTaps(i, j, tuple(zip(ks.tolist(), gs.tolist()))))
    return links


def convolution_oracle(x, links, n):
    """y_j = sum_i x_i * h_ij with a dense 512-sample impulse response."""
    length = x.shape[1]
    y = np.zeros((n, length), dtype=np.complex128)
    for link in links:
        h = np.zeros(512, dtype=np.complex128)
        for k, g in link.taps:
            h[k] += g
        y[link.rx] += np.convolve(x[link.tx], h)[:length]
    return y


def run_engine(engine, x):
    """Push a (n, L) signal through ``engine`` block by block (L multiple of B)."""
    b = engine.block_size
    return np.concatenate([engine.process(x[:, s:s + b]) for s in range(0, x.shape[1], b)], axis=1)


def qfunc(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def friis_loss_db(d, f, c=2.998e8):
    return 20.0 * math.log10(4.0 * math.pi * d * f / c)


def through_engine(tx, links, noise_dbfs, seed=0, block=4096):
    """Send rows of ``tx`` through an engine; returns the received rows."""
    n, length = tx.shape
    pad = -length % block
    x = np.concatenate([tx, np.zeros((n, pad + block))], axis=1)
    e = create_engine(EngineConfig(n, 1e6, block, noise_dbfs, seed))
    e.set_taps(links)
    return run_engine(e, x)


def measure_ber(ebn0_db, n_bits, seed=0):
    """BER of modem payload bits through an identity link with engine noise."""
    payloads = []
    gen = np.random.default_rng(seed)
    while 8 * MAX_PAYLOAD * len(payloads) < n_bits:
        payloads.append(gen.bytes(MAX_PAYLOAD))
    gap = np.zeros(64)
    frames = [np.concatenate([modem_tx(p), gap]) for p in payloads]
    starts = np.cumsum([0] + [len(f) for f in frames[:-1]])
    by_start = dict(zip(starts.tolist(), payloads))
    stream = np.concatenate(frames)
    tx = np.zeros((2, len(stream)), dtype=complex)
    tx[0] = stream
    y = through_engine(tx, [CirTaps(0, 1, ((0, 1.0),))], -ebn0_db, seed=seed)
    errors = bits = 0
    for f in ModemRx().feed(y[1]):
        if f.start not in by_start or f.length != MAX_PAYLOAD:
            continue
        ref = np.unpackbits(np.frombuffer(by_start[f.start], dtype=np.uint8))
        errors += int(np.count_nonzero(f.payload_bits != ref))
        bits += len(ref)
    return errors / bits, bits
