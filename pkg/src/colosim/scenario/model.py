"""Immutable scenario records and their invariant checks."""

import math
from dataclasses import dataclass, field
from enum import Enum

from ..channel import MAX_CHANNELS, ChannelError, CirTaps
from .errors import InvariantError

MAX_UDP_PAYLOAD = 65507


@dataclass(frozen=True)
class TapUpdate:
    t_ms: int
    links: tuple
    carrier_hz: float | None = None


@dataclass(frozen=True)
class RfScenario:
    id: str
    n_nodes: int
    duration_ms: int
    sample_rate_hz: float
    carrier_hz: float
    noise_power_dbfs: float
    updates: tuple

    def summary(self):
        return {
            "id": self.id,
            "n_nodes": self.n_nodes,
            "duration_ms": self.duration_ms,
            "carrier_hz": self.carrier_hz,
        }

    def info(self):
        d = self.summary()
        d.update(
            sample_rate_hz=self.sample_rate_hz,
            noise_power_dbfs=self.noise_power_dbfs,
            n_updates=len(self.updates),
            n_link_entries=sum(len(u.links) for u in self.updates),
            carrier_overrides=sorted({u.carrier_hz for u in self.updates if u.carrier_hz is not None}),
        )
        return d


class FlowKind(str, Enum):
    ON = "ON"
    OFF = "OFF"


class Pattern(str, Enum):
    PERIODIC = "PERIODIC"
    POISSON = "POISSON"
    BURST = "BURST"


@dataclass(frozen=True)
class FlowEvent:
    t_ms: int
    kind: FlowKind
    flow_id: int
    src_node: int | None = None
    dst_node: int | None = None
    pattern: Pattern | None = None
    rate_pps: float | None = None
    size_bytes: int | None = None


@dataclass(frozen=True)
class TrafficScenario:
    id: str
    events: tuple

    def flows(self):
        """ON events keyed by flow id."""
        return {e.flow_id: e for e in self.events if e.kind is FlowKind.ON}

    def off_times(self):
        return {e.flow_id: e.t_ms for e in self.events if e.kind is FlowKind.OFF}


NODE_ROLES = ("probe_tx", "probe_rx", "modem_endpoint", "silent")


@dataclass(frozen=True)
class NodeSpec:
    role: str
    command: str = ""


@dataclass(frozen=True)
class BatchJobSpec:
    duration_s: float
    rf_scenario_id: str
    n_nodes: int
    nodes: tuple
    team: str
    traffic_scenario_id: str | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0

    def check_against(self, rf: RfScenario):
        """Cross-document invariants, checked once the scenario is resolved."""
        if self.n_nodes > rf.n_nodes:
            raise InvariantError(
                f"job needs {self.n_nodes} nodes, scenario {rf.id!r} has {rf.n_nodes}", "n_nodes")
        if self.duration_s * 1000 > rf.duration_ms:
            raise InvariantError(
                f"duration {self.duration_s} s exceeds scenario duration {rf.duration_ms} ms",
                "duration_s")


def check_real(value, path, *, positive=False, allow_neg_inf=False):
    if math.isnan(value) or value == math.inf or (value == -math.inf and not allow_neg_inf):
        raise InvariantError(f"{value!r} is not an allowed value", path)
    if positive and not value > 0:
        raise InvariantError("must be > 0", path)


def validate_rf_scenario(s: RfScenario):
    if not isinstance(s.id, str) or not s.id:
        raise InvariantError("id must be a non-empty string", "id")
    if s.n_nodes < 2:
        raise InvariantError("n_nodes must be ≥ 2", "n_nodes")
    if s.n_nodes * (s.n_nodes - 1) > MAX_CHANNELS:
        raise InvariantError(f"N·(N−1) exceeds {MAX_CHANNELS} channels", "n_nodes")
    if s.duration_ms <= 0:
        raise InvariantError("duration_ms must be > 0", "duration_ms")
    check_real(s.sample_rate_hz, "sample_rate_hz", positive=True)
    check_real(s.carrier_hz, "carrier_hz", positive=True)
    check_real(s.noise_power_dbfs, "noise_power_dbfs", allow_neg_inf=True)
    if not s.updates:
        raise InvariantError("at least one update is required", "updates")
    if s.updates[0].t_ms != 0:
        raise InvariantError("first update must be at t_ms = 0", "updates[0].t_ms")
    prev = 0
    for ui, u in enumerate(s.updates):
        up = f"updates[{ui}]"
        if u.t_ms < prev:
            raise InvariantError("updates must be sorted by t_ms", f"{up}.t_ms")
        if not 0 <= u.t_ms < s.duration_ms:
            raise InvariantError(f"t_ms {u.t_ms} outside [0, {s.duration_ms})", f"{up}.t_ms")
        prev = u.t_ms
        if u.carrier_hz is not None:
            check_real(u.carrier_hz, f"{up}.carrier_hz", positive=True)
        seen = set()
        for li, link in enumerate(u.links):
            lp = f"{up}.links[{li}]"
            if not isinstance(link, CirTaps):
                raise InvariantError("expected CirTaps", lp)
            if link.tx >= s.n_nodes or link.rx >= s.n_nodes:
                raise InvariantError(
                    f"link {link.tx}->{link.rx} references node ≥ n_nodes={s.n_nodes}", lp)
            if (link.tx, link.rx) in seen:
                raise InvariantError(f"link {link.tx}->{link.rx} listed twice", lp)
            seen.add((link.tx, link.rx))


def make_cir(tx, rx, taps, path):
    """CirTaps constructor that reports failures as located InvariantErrors."""
    try:
        return CirTaps(tx, rx, taps)
    except ChannelError as exc:
        raise InvariantError(str(exc), path) from None


def validate_traffic(s: TrafficScenario):
    on = set()
    off = set()
    prev = 0
    for i, e in enumerate(s.events):
        p = f"events[{i}]"
        if e.t_ms < prev:
            raise InvariantError("events must be sorted by time", p)
        if e.t_ms < 0:
            raise InvariantError("time must be ≥ 0", p)
        prev = e.t_ms
        if e.kind is FlowKind.ON:
            if e.flow_id in on:
                raise InvariantError(f"duplicate flow id {e.flow_id} ON", p)
            if not e.rate_pps > 0 or not math.isfinite(e.rate_pps):
                raise InvariantError("rate_pps > 0 required", p)
            if not 1 <= e.size_bytes <= MAX_UDP_PAYLOAD:
                raise InvariantError(f"size_bytes must be in [1, {MAX_UDP_PAYLOAD}]", p)
            if e.src_node < 0 or e.dst_node < 0:
                raise InvariantError("node ids must be ≥ 0", p)
            if e.src_node == e.dst_node:
                raise InvariantError("src and dst must differ", p)
            on.add(e.flow_id)
        else:
            if e.flow_id not in on or e.flow_id in off:
                raise InvariantError(f"OFF without ON for flow {e.flow_id}", p)
            off.add(e.flow_id)
