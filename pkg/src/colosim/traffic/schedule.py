"""Packet schedules for PERIODIC, POISSON and BURST flows."""

import heapq
import math
from dataclasses import dataclass

from .. import rng
from ..scenario.model import Pattern, TrafficScenario

BURST_PERIOD_MS = 1000.0
BURST_DUTY = 0.5


@dataclass(frozen=True)
class Packet:
    flow_id: int
    seq: int
    src_node: int
    dst_node: int
    size_bytes: int
    sent_at_ms: float

    def payload(self):
        """Deterministic filler derived from (flow, seq)."""
        start = (self.flow_id * 131 + self.seq * 7) & 0xFF
        return bytes((start + i) & 0xFF for i in range(self.size_bytes))


def _periodic(on, off, rate):
    step = 1000.0 / rate
    m = 0
    while True:
        t = on + m * step
        if t >= off:
            return
        yield t
        m += 1


def _poisson(on, off, rate, key):
    t = float(on)
    m = 0
    scale = 1000.0 / rate
    while True:
        u = 1.0 - float(rng.uniform(key, [m])[0])  # (0, 1]
        t += -math.log(u) * scale
        if t >= off:
            return
        yield t
        m += 1


def _burst(on, off, rate, period_ms=BURST_PERIOD_MS, duty=BURST_DUTY):
    step = 1000.0 / rate
    active = period_ms * duty
    p = 0
    while True:
        start = on + p * period_ms
        if start >= off:
            return
        m = 0
        while m * step < active:
            t = start + m * step
            if t >= off:
                return
            yield t
            m += 1
        p += 1


def flow_times(event, off_ms, seed):
    if event.pattern is Pattern.PERIODIC:
        return _periodic(event.t_ms, off_ms, event.rate_pps)
    if event.pattern is Pattern.POISSON:
        key = rng.stream_key(seed, rng.DOMAIN_TRAFFIC, event.flow_id)
        return _poisson(event.t_ms, off_ms, event.rate_pps, key)
    return _burst(event.t_ms, off_ms, event.rate_pps)


class PacketSource:
    """Time-ordered iterator over every packet of a traffic scenario.

    Ties are broken by flow id. Flows without an OFF event run until
    ``end_ms`` (or forever when ``end_ms`` is None).
    """

    def __init__(self, scenario: TrafficScenario, seed=0, end_ms=None):
        self.scenario = scenario
        self.seed = seed
        end = math.inf if end_ms is None else float(end_ms)
        offs = scenario.off_times()
        self._heap = []
        self._gens = {}
        for fid, ev in sorted(scenario.flows().items()):
            gen = flow_times(ev, min(offs.get(fid, math.inf), end), seed)
            self._gens[fid] = (ev, gen, [0])
            self._push(fid)

    def _push(self, fid):
        ev, gen, seq = self._gens[fid]
        t = next(gen, None)
        if t is not None:
            heapq.heappush(self._heap, (t, fid, seq[0]))
            seq[0] += 1

    def __iter__(self):
        return self

    def __next__(self):
        if not self._heap:
            raise StopIteration
        t, fid, seq = heapq.heappop(self._heap)
        self._push(fid)
        ev = self._gens[fid][0]
        return Packet(fid, seq, ev.src_node, ev.dst_node, ev.size_bytes, t)

    def peek_time(self):
        return self._heap[0][0] if self._heap else math.inf

    def until(self, t_ms):
        """Pop every packet scheduled strictly before ``t_ms``."""
        out = []
        while self._heap and self._heap[0][0] < t_ms:
            out.append(next(self))
        return out


def schedule(scenario: TrafficScenario, seed=0, end_ms=None) -> PacketSource:
    return PacketSource(scenario, seed, end_ms)


def offered_load_bps(scenario: TrafficScenario, t0_ms, t1_ms):
    """Aggregate mean offered load of flows active over all of [t0, t1)."""
    offs = scenario.off_times()
    total = 0.0
    for fid, ev in scenario.flows().items():
        if ev.t_ms <= t0_ms and offs.get(fid, math.inf) >= t1_ms:
            duty = BURST_DUTY if ev.pattern is Pattern.BURST else 1.0
            total += ev.rate_pps * ev.size_bytes * 8 * duty
    return total
