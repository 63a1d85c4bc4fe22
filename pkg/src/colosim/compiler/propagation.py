"""Propagation stand-ins: free-space / log-distance pathloss, delay
quantisation, and Rayleigh / Rician tap fading."""

import math
from dataclasses import dataclass

import numpy as np

from .. import rng
from ..channel import HISTORY, MAX_NONZERO_TAPS, SPEED_OF_LIGHT


class CompileError(ValueError):
    pass


FSPL = "FSPL"
LOG_DISTANCE = "LOG_DISTANCE"
MODELS = (FSPL, LOG_DISTANCE)
FADING_MODES = ("NONE", "RAYLEIGH", "RICIAN")


@dataclass(frozen=True)
class ChannelModelParams:
    model: str = FSPL
    pathloss_exponent: float = 2.0
    reference_distance_m: float = 1.0
    fading: str = "NONE"
    k_factor_db: float = 0.0
    # up to three (excess_delay_s, relative_power_db) pairs after the LoS tap
    multipath_profile: tuple = ()
    rng_seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise CompileError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.fading not in FADING_MODES:
            raise CompileError(f"fading must be one of {FADING_MODES}, got {self.fading!r}")
        if self.model == LOG_DISTANCE and not 1.6 <= self.pathloss_exponent <= 6:
            raise CompileError("pathloss_exponent must lie in [1.6, 6]")
        if not self.reference_distance_m > 0:
            raise CompileError("reference_distance_m must be > 0")
        if math.isnan(self.k_factor_db):
            raise CompileError("k_factor_db must be a number")
        if len(self.multipath_profile) > MAX_NONZERO_TAPS - 1:
            raise CompileError(
                f"multipath profile has {len(self.multipath_profile)} excess taps; "
                f"the 4-tap budget leaves room for {MAX_NONZERO_TAPS - 1}")
        for delay, _ in self.multipath_profile:
            if not delay > 0:
                raise CompileError("excess delays must be > 0")

    @property
    def k_factor(self):
        return 10.0 ** (self.k_factor_db / 10.0)

    def max_excess_delay_s(self):
        return max((d for d, _ in self.multipath_profile), default=0.0)

    def check_window(self, fs):
        k = round(self.max_excess_delay_s() * fs)
        if k > HISTORY:
            raise CompileError(f"excess delay of {k} samples does not fit the 512-tap window at fs={fs}")


def fspl_magnitude(d_m, f_hz):
    return SPEED_OF_LIGHT / (4.0 * np.pi * np.asarray(d_m, dtype=float) * f_hz)


def pathloss_magnitude(d_m, f_hz, params: ChannelModelParams):
    d = np.asarray(d_m, dtype=float)
    if params.model == FSPL:
        return fspl_magnitude(d, f_hz)
    d0 = params.reference_distance_m
    return fspl_magnitude(d0, f_hz) * (d0 / d) ** (params.pathloss_exponent / 2.0)


def pathloss_gain(d_m, f_hz, params: ChannelModelParams = ChannelModelParams()):
    """Complex link gain: pathloss magnitude with propagation phase ``-2 pi f d / c``."""
    if not f_hz > 0:
        raise CompileError("frequency must be > 0")
    if np.any(np.asarray(d_m) < params.reference_distance_m):
        raise CompileError(
            f"distance {d_m} m below reference distance {params.reference_distance_m} m")
    mag = pathloss_magnitude(d_m, f_hz, params)
    phase = -2.0 * np.pi * f_hz * np.asarray(d_m, dtype=float) / SPEED_OF_LIGHT
    g = mag * np.exp(1j * phase)
    return complex(g) if np.ndim(g) == 0 else g


def pathloss_db(d_m, f_hz, params: ChannelModelParams = ChannelModelParams()):
    return -20.0 * np.log10(np.abs(pathloss_gain(d_m, f_hz, params)))


def delay_to_tap(d_m, fs):
    """Tap index of a path of length ``d_m``: round(d / c * fs)."""
    x = d_m / SPEED_OF_LIGHT * fs
    if x > HISTORY:
        max_d = HISTORY / fs * SPEED_OF_LIGHT
        raise CompileError(
            f"{d_m} m is {x:.1f} samples at fs={fs}; the tap window holds {HISTORY} "
            f"(max distance {max_d:.1f} m)")
    return int(round(x))


def fading_factors(params: ChannelModelParams, t_ms, link_ids):
    """Multiplicative fading for every tap of every link: shape (len(link_ids), 1 + profile)."""
    link_ids = np.atleast_1d(np.asarray(link_ids, dtype=np.int64))
    n_taps = 1 + len(params.multipath_profile)
    rel = np.array([1.0] + [10.0 ** (p / 20.0) for _, p in params.multipath_profile])
    out = np.tile(rel, (len(link_ids), 1)).astype(np.complex128)
    if params.fading == "NONE":
        return out
    kf = params.k_factor
    if params.fading == "RICIAN" and kf == math.inf:
        return out
    counters = np.arange(n_taps, dtype=np.uint64) + np.uint64(int(t_ms) * MAX_NONZERO_TAPS)
    for row, lid in enumerate(link_ids):
        key = rng.stream_key(params.rng_seed, rng.DOMAIN_FADING, int(lid))
        z = rng.std_complex_normal(key, counters)
        if params.fading == "RICIAN":
            z = math.sqrt(kf / (kf + 1.0)) + math.sqrt(1.0 / (kf + 1.0)) * z
        out[row] *= z
    return out


def fading_taps(base_gain, params: ChannelModelParams, t_ms, link_id):
    """Gains of the LoS tap plus each profile tap for one link at one time."""
    return [complex(base_gain * f) for f in fading_factors(params, t_ms, [link_id])[0]]


def snr_to_gain(target_snr_db, noise_power_dbfs, tx_power_dbfs=0.0):
    """Link gain magnitude giving ``target_snr_db`` for a transmitter at ``tx_power_dbfs``."""
    return 10.0 ** ((target_snr_db + noise_power_dbfs - tx_power_dbfs) / 20.0)
