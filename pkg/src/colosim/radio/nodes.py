"""In-process radio nodes driven one block per engine tick.

Each node produces a transmit block for tick ``t0`` and then consumes the
receive block for the same tick. Nodes refuse out-of-order ticks, which is
how lock-step with the engine is enforced.
"""

import math
import struct
from pathlib import Path

import numpy as np

from ..channel import HISTORY
from .estimate import PnProbe, ProbeNotFoundError, fit_probe
from .modem import MAX_PAYLOAD, ModemRx, frame_len, modem_tx

ROLES = ("probe_tx", "probe_rx", "modem_endpoint", "silent")
DEFAULT_PROBE_LEN = 10_000
DEFAULT_PROBE_PERIOD_MS = 100.0
FRAME_GAP = 32

_FRAG_HDR = struct.Struct(">IIHHHH")  # flow, seq, src, dst, frag index, frag count
FRAG_DATA = MAX_PAYLOAD - _FRAG_HDR.size


class TickStarvationError(RuntimeError):
    pass


class NodeHarness:
    role = "silent"
    skippable = True

    def __init__(self, node_id, fs, block_size, log_dir=None, clock=0):
        self.node_id = node_id
        self.fs = float(fs)
        self.block_size = block_size
        self.next_t0 = clock
        self.ticks = 0
        self._log = None
        if log_dir is not None:
            d = Path(log_dir) / f"node{node_id}"
            d.mkdir(parents=True, exist_ok=True)
            self.log_dir = d
            self._log = open(d / "events.log", "w", encoding="utf-8")
        else:
            self.log_dir = None
        self.log(f"start role={self.role} fs={self.fs:g} block={block_size}")

    def t_ms(self, sample):
        return sample / self.fs * 1000.0

    def log(self, msg, sample=None):
        if self._log is not None:
            t = self.t_ms(self.next_t0 if sample is None else sample)
            self._log.write(f"{t:.3f} {msg}\n")

    def _check(self, t0):
        if t0 != self.next_t0:
            raise TickStarvationError(
                f"node {self.node_id}: tick at sample {t0}, expected {self.next_t0}")

    def tx(self, t0):
        self._check(t0)
        return self._tx(t0)

    def rx(self, t0, samples):
        self._check(t0)
        self._rx(t0, samples)
        self.next_t0 += self.block_size
        self.ticks += 1

    def skip(self, n_blocks):
        if not self.skippable:
            raise TickStarvationError(f"node {self.node_id} ({self.role}) cannot skip ticks")
        self.next_t0 += n_blocks * self.block_size
        self.ticks += n_blocks

    def idle_until(self, t0):
        """First sample at or after ``t0`` where this node needs a real tick.

        Between ``t0`` and that sample the node transmits zeros and ignores
        what it receives, so the span may be fast-forwarded.
        """
        return t0

    def _tx(self, t0):
        return np.zeros(self.block_size, dtype=np.complex128)

    def _rx(self, t0, samples):
        pass

    def close(self):
        self.log(f"stop ticks={self.ticks}")
        if self._log is not None:
            self._log.close()
            self._log = None


class SilentNode(NodeHarness):
    role = "silent"

    def idle_until(self, t0):
        return math.inf


class ProbeTxNode(NodeHarness):
    """Sends its probe at the start of every period, silent in between."""

    role = "probe_tx"

    def __init__(self, node_id, fs, block_size, log_dir=None, clock=0, *,
                 probe_len=DEFAULT_PROBE_LEN, period_ms=DEFAULT_PROBE_PERIOD_MS, probe_seed=None,
                 amplitude=1.0):
        self.probe = PnProbe(probe_len, node_id if probe_seed is None else probe_seed)
        self.period = int(round(period_ms * fs / 1000.0))
        if self.period < probe_len:
            raise ValueError("probe period shorter than the probe")
        self._chips = self.probe.samples * amplitude
        super().__init__(node_id, fs, block_size, log_dir, clock)

    def idle_until(self, t0):
        phase = t0 % self.period
        return t0 if phase < self.probe.length else t0 - phase + self.period

    def _tx(self, t0):
        n = np.arange(t0, t0 + self.block_size)
        phase = n % self.period
        out = np.zeros(self.block_size, dtype=np.complex128)
        on = phase < self.probe.length
        out[on] = self._chips[phase[on]]
        return out


class ProbeRxNode(NodeHarness):
    """Captures one window per probe period and logs the estimated SNR."""

    role = "probe_rx"

    def __init__(self, node_id, fs, block_size, log_dir=None, clock=0, *,
                 probe_len=DEFAULT_PROBE_LEN, period_ms=DEFAULT_PROBE_PERIOD_MS, probe_seed=0,
                 max_delay=511):
        self.probe = PnProbe(probe_len, probe_seed)
        self._chips = self.probe.samples
        self.period = int(round(period_ms * fs / 1000.0))
        self.window = probe_len + max_delay
        self._cap = {}
        self.estimates = []  # (period start sample, snr_db or None)
        super().__init__(node_id, fs, block_size, log_dir, clock)

    def idle_until(self, t0):
        phase = t0 % self.period
        return t0 if phase < self.window else t0 - phase + self.period

    def _rx(self, t0, samples):
        end = t0 + len(samples)
        first = (t0 // self.period) * self.period
        for start in range(first, end, self.period):
            lo, hi = max(start, t0), min(start + self.window, end)
            if lo >= hi:
                continue
            self._cap.setdefault(start, []).append(samples[lo - t0:hi - t0])
            if hi == start + self.window:
                self._finish(start)

    def _finish(self, start):
        window = np.concatenate(self._cap.pop(start))
        try:
            fit = fit_probe(self._chips, window)
            self.estimates.append((start, fit.snr_db))
            self.log(f"probe snr_db={fit.snr_db:.3f} lag={fit.lag}", start)
        except ProbeNotFoundError:
            self.estimates.append((start, None))
            self.log("probe not found", start)

    def skip(self, n_blocks):
        self._cap.clear()
        super().skip(n_blocks)


class ModemEndpointNode(NodeHarness):
    """Carries traffic packets over the BPSK modem.

    Packets handed in by the traffic port are fragmented into frames, sent
    back to back with a short gap, and reassembled at the destination, which
    reports the delivery time (end of the last frame) to the traffic port.

    With ``slot_samples`` set, frames only start inside the node's own TDMA
    slot (slot index ``node_id % n_slots``). There is no other medium access
    control, so overlapping frames simply collide.
    """

    role = "modem_endpoint"

    def __init__(self, node_id, fs, block_size, log_dir=None, clock=0, *, traffic_port=None,
                 slot_samples=None, n_slots=1):
        if slot_samples is not None and slot_samples < frame_len(MAX_PAYLOAD) + FRAME_GAP:
            raise ValueError(f"slot of {slot_samples} samples cannot hold a full frame")
        if n_slots < 1:
            raise ValueError("n_slots must be ≥ 1")
        self.traffic_port = traffic_port
        self.slot_samples = slot_samples
        self.n_slots = n_slots
        self._txq = []
        self._txbuf = np.zeros(0, dtype=np.complex128)
        self._rxm = ModemRx(clock)
        self._partial = {}
        self._tx_end = -HISTORY - 1
        self.delivered = 0
        super().__init__(node_id, fs, block_size, log_dir, clock)

    @property
    def skippable(self):
        return len(self._txbuf) == 0 and not self._txq

    def idle_until(self, t0):
        # stay awake until our last frame has cleared every receiver's tap window
        if not self.skippable or t0 <= self._tx_end + HISTORY:
            return t0
        return math.inf

    def submit(self, packet):
        data = packet.payload()
        chunks = [data[i:i + FRAG_DATA] for i in range(0, len(data), FRAG_DATA)] or [b""]
        for idx, chunk in enumerate(chunks):
            hdr = _FRAG_HDR.pack(packet.flow_id, packet.seq, packet.src_node, packet.dst_node,
                                 idx, len(chunks))
            self._txq.append(modem_tx(hdr + chunk))
        self.log(f"queue flow={packet.flow_id} seq={packet.seq} frames={len(chunks)}")

    def _frame_start(self, pos, n):
        """Earliest sample ≥ ``pos`` at which an ``n``-sample burst fits in our slot."""
        if self.slot_samples is None:
            return pos
        period = self.slot_samples * self.n_slots
        offset = (self.node_id % self.n_slots) * self.slot_samples
        start = offset + (pos - offset) // period * period
        if start <= pos and pos + n <= start + self.slot_samples:
            return pos
        return start + period if start + period > pos else start + 2 * period

    def _tx(self, t0):
        b = self.block_size
        pos = t0 + len(self._txbuf)
        while len(self._txbuf) < b and self._txq:
            frame = self._txq.pop(0)
            n = len(frame) + FRAME_GAP
            pad = self._frame_start(pos, n) - pos
            self._txbuf = np.concatenate([self._txbuf, np.zeros(pad), frame, np.zeros(FRAME_GAP)])
            pos += pad + n
        out = np.zeros(b, dtype=np.complex128)
        n = min(b, len(self._txbuf))
        out[:n] = self._txbuf[:n]
        self._txbuf = self._txbuf[n:]
        if n:
            self._tx_end = t0 + n
        return out

    def _rx(self, t0, samples):
        for f in self._rxm.feed(samples):
            if not f.ok or len(f.payload) < _FRAG_HDR.size:
                continue
            flow, seq, src, dst, idx, count = _FRAG_HDR.unpack_from(f.payload)
            if dst != self.node_id:
                continue
            got = self._partial.setdefault((src, flow, seq), set())
            got.add(idx)
            if len(got) == count:
                del self._partial[(src, flow, seq)]
                t_ms = self.t_ms(f.end)
                self.delivered += 1
                self.log(f"deliver flow={flow} seq={seq} from={src}", f.end)
                if self.traffic_port is not None:
                    self.traffic_port.deliver(flow, seq, t_ms)

    def skip(self, n_blocks):
        super().skip(n_blocks)
        self._rxm = ModemRx(self.next_t0)


_ROLE_CLASSES = {
    "silent": SilentNode,
    "probe_tx": ProbeTxNode,
    "probe_rx": ProbeRxNode,
    "modem_endpoint": ModemEndpointNode,
}


def run_node(role, node_id, rf_port, traffic_port=None, clock=None, log_dir=None, **opts):
    """Build the node task for ``role`` wired to an engine (``rf_port``).

    ``rf_port`` supplies the sample rate, block size and, unless ``clock``
    is given, the starting sample clock.
    """
    if role not in _ROLE_CLASSES:
        raise ValueError(f"unknown role {role!r}; known: {', '.join(ROLES)}")
    if clock is None:
        clock = rf_port.clock
    if role == "modem_endpoint":
        opts["traffic_port"] = traffic_port
    return _ROLE_CLASSES[role](node_id, rf_port.sample_rate_hz, rf_port.block_size, log_dir,
                               clock, **opts)
