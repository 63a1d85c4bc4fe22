"""Probe sequences and least-squares SNR / SINR estimation."""

import math
from dataclasses import dataclass

import numpy as np

from .. import rng

SNR_CEILING_DB = 100.0


class ProbeNotFoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class PnProbe:
    """Real +-1 chip sequence; distinct seeds give near-orthogonal probes."""

    length: int
    seed: int = 0

    @property
    def samples(self):
        return rng.pn_chips(self.seed, 0, self.length).astype(np.complex128)

    @property
    def power(self):
        return 1.0


@dataclass(frozen=True)
class ProbeFit:
    lag: int
    gain: complex
    correlation: float
    snr_db: float


def _xcorr(rx, p):
    """sum_k rx[n + k] * conj(p[k]) for every full-overlap lag n."""
    n_out = len(rx) - len(p) + 1
    if len(p) <= 128:
        return np.correlate(rx, p, mode="valid")
    nfft = 1 << int(math.ceil(math.log2(len(rx) + len(p))))
    r = np.fft.ifft(np.fft.fft(rx, nfft) * np.conj(np.fft.fft(p, nfft)))
    return r[:n_out]


def detection_threshold(length):
    return min(0.5, 6.0 / math.sqrt(length))


def locate(probe_samples, rx, threshold=None):
    """Lag of best normalised correlation; ProbeNotFoundError below threshold."""
    p = np.asarray(probe_samples, dtype=np.complex128)
    rx = np.asarray(rx, dtype=np.complex128)
    L = len(p)
    if len(rx) < L:
        raise ProbeNotFoundError(f"received window ({len(rx)}) shorter than probe ({L})")
    c = np.abs(_xcorr(rx, p))
    e = np.concatenate(([0.0], np.cumsum(np.abs(rx) ** 2)))
    win = np.maximum(e[L:] - e[:-L], 0.0)
    ep = float(np.vdot(p, p).real)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(win > 0, c / np.sqrt(ep * win), 0.0)
    lag = int(np.argmax(coef))
    thr = detection_threshold(L) if threshold is None else threshold
    if not coef[lag] >= thr:
        raise ProbeNotFoundError(
            f"probe not found: peak normalised correlation {coef[lag]:.3g} < {thr:.3g}")
    return lag, float(coef[lag])


def fit_probe(probe_samples, rx, threshold=None) -> ProbeFit:
    """Locate the probe, fit one complex gain by least squares, and report
    ``|g|^2 * P_probe / residual variance`` in dB (capped at SNR_CEILING_DB)."""
    p = np.asarray(probe_samples, dtype=np.complex128)
    lag, coef = locate(p, rx, threshold)
    seg = np.asarray(rx[lag:lag + len(p)], dtype=np.complex128)
    ep = float(np.vdot(p, p).real)
    g = complex(np.vdot(p, seg) / ep)
    res = seg - g * p
    noise_var = float(np.vdot(res, res).real) / (len(p) - 1)
    sig = abs(g) ** 2 * ep / len(p)
    if noise_var <= sig * 10.0 ** (-SNR_CEILING_DB / 10.0):
        snr = SNR_CEILING_DB
    else:
        snr = 10.0 * math.log10(sig / noise_var)
    return ProbeFit(lag, g, coef, snr)


def estimate_snr(probe, received):
    samples = probe.samples if isinstance(probe, PnProbe) else probe
    return fit_probe(samples, received).snr_db


def estimate_sinr(probe, received):
    """Same least-squares projection; whatever is left after removing the
    desired probe (interference plus noise) is the denominator."""
    return estimate_snr(probe, received)
