"""Sample-domain channel engine.

Each receiver ``j`` gets ``y_j[n] = sum_{i != j} sum_{(k, g)} g * x_i[n - k] + w_j[n]``
where the taps come from the directed link ``i -> j``. Tap and tuning changes
are staged and take effect at the next block boundary.
"""

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import rng
from .kernels import HISTORY, MAX_NONZERO_TAPS, N_TAP_SLOTS, mix

SPEED_OF_LIGHT = 2.998e8
MAX_CHANNELS = 65535


class ChannelError(ValueError):
    """Invalid engine configuration, tap update or input block."""


def _check_finite_gain(g, what):
    if not (math.isfinite(g.real) and math.isfinite(g.imag)):
        raise ChannelError(f"{what}: gain {g!r} is not finite")


@dataclass(frozen=True, slots=True)
class CirTaps:
    """Sparse impulse response of the directed link ``tx -> rx``.

    ``taps`` is a tuple of ``(k, g)`` pairs, ``k`` the delay in samples.
    An empty tuple is a silent link.
    """

    tx: int
    rx: int
    taps: tuple = ()

    def __post_init__(self):
        taps = tuple((int(k), complex(g)) for k, g in self.taps)
        object.__setattr__(self, "taps", taps)
        where = f"link {self.tx}->{self.rx}"
        if self.tx == self.rx:
            raise ChannelError(f"{where}: tx == rx (self-channel is fixed at zero)")
        if self.tx < 0 or self.rx < 0:
            raise ChannelError(f"{where}: negative node id")
        if len(taps) > MAX_NONZERO_TAPS:
            raise ChannelError(
                f"{where}: more than {MAX_NONZERO_TAPS} non-zero taps ({len(taps)})")
        prev = -1
        for k, g in taps:
            if not 0 <= k < N_TAP_SLOTS:
                raise ChannelError(f"{where}: tap index {k} outside [0, {N_TAP_SLOTS})")
            if k <= prev:
                raise ChannelError(f"{where}: tap indices must be strictly increasing")
            prev = k
            _check_finite_gain(g, where)


@dataclass(frozen=True)
class NodeTuning:
    node_id: int
    tuned_freq_hz: float

    def __post_init__(self):
        if not self.tuned_freq_hz > 0:
            raise ChannelError(f"node {self.node_id}: tuned_freq_hz must be > 0")


@dataclass
class SampleBlock:
    node_id: int
    t0: int
    samples: np.ndarray


@dataclass
class EngineConfig:
    n_nodes: int
    sample_rate_hz: float
    block_size: int = 4096
    # scalar applies to every receiver; -inf disables noise
    noise_power_dbfs: float | Sequence[float] = -math.inf
    rng_seed: int = 0

    def validate(self):
        if self.n_nodes < 2:
            raise ChannelError("n_nodes: must satisfy n_nodes ≥ 2")
        if self.n_nodes * (self.n_nodes - 1) > MAX_CHANNELS:
            raise ChannelError(
                f"n_nodes: {self.n_nodes} nodes need {self.n_nodes * (self.n_nodes - 1)} "
                f"directed channels, cap is {MAX_CHANNELS}")
        if not self.sample_rate_hz > 0:
            raise ChannelError("sample_rate_hz: must be > 0")
        if self.block_size < 1:
            raise ChannelError("block_size: must be ≥ 1")
        if not 0 <= int(self.rng_seed) <= rng.MASK64:
            raise ChannelError("rng_seed: must be an unsigned 64-bit integer")
        p = self.noise_powers()
        if p.shape != (self.n_nodes,):
            raise ChannelError("noise_power_dbfs: need a scalar or one value per node")
        if np.any(np.isnan(p)) or np.any(p == math.inf):
            raise ChannelError("noise_power_dbfs: must be finite or -inf")

    def noise_powers(self):
        p = np.asarray(self.noise_power_dbfs, dtype=np.float64)
        if p.ndim == 0:
            p = np.full(self.n_nodes, float(p))
        return p


def max_emulable_delay(sample_rate_hz):
    """Longest delay the 512-slot tap window can represent: (seconds, meters)."""
    fs = getattr(sample_rate_hz, "sample_rate_hz", sample_rate_hz)
    seconds = HISTORY / fs
    return seconds, seconds * SPEED_OF_LIGHT


@dataclass
class _Pending:
    links: list = field(default_factory=list)
    carrier_hz: float | None = None
    carrier_set: bool = False
    tunings: list = field(default_factory=list)

    def __bool__(self):
        return bool(self.links or self.carrier_set or self.tunings)


class Engine:
    """One emulated RF environment with ``n_nodes`` single-antenna nodes."""

    def __init__(self, config: EngineConfig):
        config.validate()
        self.config = config
        n = config.n_nodes
        self.n_nodes = n
        self.block_size = config.block_size
        self.sample_rate_hz = float(config.sample_rate_hz)
        self._tap_k = np.zeros((n, n, MAX_NONZERO_TAPS), dtype=np.int64)
        self._tap_g = np.zeros((n, n, MAX_NONZERO_TAPS), dtype=np.complex128)
        self._tap_n = np.zeros((n, n), dtype=np.int64)
        self._tuning = np.full(n, np.nan)
        self.carrier_hz = None
        self._active = np.ones((n, n), dtype=np.bool_)
        self._pending = _Pending()
        powers = config.noise_powers()
        self._noise_sigma = np.where(np.isneginf(powers), 0.0, np.sqrt(10.0 ** (powers / 10.0)))
        self._noise_keys = [rng.stream_key(config.rng_seed, rng.DOMAIN_NOISE, j) for j in range(n)]
        self._x_ext = np.zeros((n, HISTORY + self.block_size), dtype=np.complex128)
        self.clock = 0
        self.blocks_processed = 0
        self.tap_visits = 0

    # -- staging ---------------------------------------------------------

    def set_taps(self, updates, carrier_hz=None):
        """Stage link updates; listed links are replaced, others keep their taps."""
        staged = []
        for u in updates:
            if not isinstance(u, CirTaps):
                u = CirTaps(*u)
            if u.tx >= self.n_nodes or u.rx >= self.n_nodes:
                raise ChannelError(f"link {u.tx}->{u.rx}: node id ≥ n_nodes={self.n_nodes}")
            staged.append(u)
        if carrier_hz is not None and not carrier_hz > 0:
            raise ChannelError("carrier_hz must be > 0")
        self._pending.links.extend(staged)
        if carrier_hz is not None:
            self._pending.carrier_hz = float(carrier_hz)
            self._pending.carrier_set = True

    def set_carrier(self, carrier_hz):
        self.set_taps([], carrier_hz)

    def set_tuning(self, tunings):
        staged = []
        for t in tunings:
            if not isinstance(t, NodeTuning):
                t = NodeTuning(*t)
            if not 0 <= t.node_id < self.n_nodes:
                raise ChannelError(f"unknown node id {t.node_id}")
            staged.append(t)
        self._pending.tunings.extend(staged)

    def _apply_pending(self):
        p = self._pending
        if not p:
            return
        for u in p.links:
            m = len(u.taps)
            self._tap_n[u.tx, u.rx] = m
            self._tap_k[u.tx, u.rx] = 0
            self._tap_g[u.tx, u.rx] = 0
            for t, (k, g) in enumerate(u.taps):
                self._tap_k[u.tx, u.rx, t] = k
                self._tap_g[u.tx, u.rx, t] = g
        if p.carrier_set:
            self.carrier_hz = p.carrier_hz
        for t in p.tunings:
            self._tuning[t.node_id] = t.tuned_freq_hz
        self._pending = _Pending()
        self._refresh_active()

    def _refresh_active(self):
        if self.carrier_hz is None:
            ok = np.ones(self.n_nodes, dtype=np.bool_)
        else:
            # untuned nodes (nan) follow the carrier
            off = np.abs(self._tuning - self.carrier_hz)
            ok = np.isnan(self._tuning) | (off <= self.sample_rate_hz / 2)
        self._active = ok[:, None] & ok[None, :]

    # -- queries ---------------------------------------------------------

    def taps(self, tx, rx):
        """Taps currently in effect on ``tx -> rx``."""
        m = self._tap_n[tx, rx]
        return CirTaps(tx, rx, tuple(zip(self._tap_k[tx, rx, :m].tolist(),
                                         self._tap_g[tx, rx, :m].tolist())))

    def link_active(self, tx, rx):
        return bool(self._active[tx, rx]) and tx != rx

    def tuning(self, node_id):
        f = self._tuning[node_id]
        return None if np.isnan(f) else float(f)

    # -- processing ------------------------------------------------------

    def process(self, x):
        """Run one block. ``x`` is ``(n_nodes, block_size)`` complex; returns the same shape."""
        b = self.block_size
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.n_nodes, b):
            raise ChannelError(f"expected tx array of shape {(self.n_nodes, b)}, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ChannelError("tx samples must be finite")
        self._apply_pending()
        self._x_ext[:, HISTORY:] = x
        y = np.zeros((self.n_nodes, b), dtype=np.complex128)
        self.tap_visits += mix(self._x_ext, self._tap_k, self._tap_g, self._tap_n, self._active, y)
        for j in range(self.n_nodes):
            sigma = self._noise_sigma[j]
            if sigma > 0:
                y[j] += rng.noise_block(self._noise_keys[j], self.clock, b, sigma)
        self._x_ext[:, :HISTORY] = self._x_ext[:, b:]
        self.clock += b
        self.blocks_processed += 1
        return y

    def process_block(self, tx_blocks):
        """Block-record form of :meth:`process`: one SampleBlock in, one out, per node."""
        if len(tx_blocks) != self.n_nodes:
            raise ChannelError(f"expected {self.n_nodes} tx blocks, got {len(tx_blocks)}")
        x = np.empty((self.n_nodes, self.block_size), dtype=np.complex128)
        seen = set()
        for blk in tx_blocks:
            if not 0 <= blk.node_id < self.n_nodes or blk.node_id in seen:
                raise ChannelError(f"missing/extra block for node {blk.node_id}")
            if blk.t0 != self.clock:
                raise ChannelError(f"node {blk.node_id}: t0={blk.t0} but engine clock is {self.clock}")
            if len(blk.samples) != self.block_size:
                raise ChannelError(f"node {blk.node_id}: block length {len(blk.samples)} != {self.block_size}")
            seen.add(blk.node_id)
            x[blk.node_id] = blk.samples
        t0 = self.clock
        y = self.process(x)
        return [SampleBlock(j, t0, y[j]) for j in range(self.n_nodes)]

    def fast_forward(self, n_blocks):
        """Advance the clock as if every node sent zeros for ``n_blocks`` blocks.

        Outputs of the skipped span are dropped; later blocks are unaffected
        because noise is keyed on absolute sample index.
        """
        if n_blocks <= 0:
            return
        self._apply_pending()
        skip = n_blocks * self.block_size
        if skip >= HISTORY:
            self._x_ext[:, :HISTORY] = 0
        else:
            self._x_ext[:, :HISTORY - skip] = self._x_ext[:, skip:HISTORY].copy()
            self._x_ext[:, HISTORY - skip:HISTORY] = 0
        self.clock += skip
        self.blocks_processed += n_blocks

    def reset(self):
        """Clear transmit history and clock; taps, tuning and carrier are kept."""
        self._x_ext[:] = 0
        self.clock = 0
        self.blocks_processed = 0
        self.tap_visits = 0


def create_engine(config: EngineConfig) -> Engine:
    return Engine(config)
