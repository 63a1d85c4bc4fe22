"""One emulation run: engine + scenario playback + node harnesses + traffic."""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..channel import Engine, EngineConfig, NodeTuning
from ..channel.iq import append_iq, iq_path
from ..radio.nodes import ModemEndpointNode, ProbeRxNode, TickStarvationError, run_node
from ..scenario.model import RfScenario, TrafficScenario
from ..scenario.rfscn import serialize_rf_scenario
from ..scenario.tgen import serialize_traffic_script
from ..traffic import FlowLog, metrics, schedule
from .playback import Playback, update_boundary

DEFAULT_BLOCK_SIZE = 4096


class TrafficHub:
    """Traffic port shared by every modem node of one experiment."""

    def __init__(self, log: FlowLog):
        self.log = log
        self._in_flight = {}
        self.duplicates = 0

    def dispatch(self, packet, node=None):
        self.log.record_sent(packet)
        self._in_flight[(packet.flow_id, packet.seq)] = packet
        if node is not None:
            node.submit(packet)

    def deliver(self, flow_id, seq, t_ms):
        packet = self._in_flight.pop((flow_id, seq), None)
        if packet is None:
            self.duplicates += 1
            return
        self.log.record_delivery(packet, t_ms)


@dataclass
class ExperimentResult:
    exp_id: str
    duration_s: float
    blocks: int
    skipped_blocks: int
    flows: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "exp_id": self.exp_id,
            "duration_s": self.duration_s,
            "blocks": self.blocks,
            "skipped_blocks": self.skipped_blocks,
            "flows": {str(k): v for k, v in sorted(self.flows.items())},
            "probes": {str(k): v for k, v in sorted(self.probes.items())},
        }


def _finite(v):
    return None if v is None or not math.isfinite(v) else v


def _ms_to_sample(t_ms, fs):
    return math.ceil(Fraction(t_ms) * Fraction(fs) / 1000)


class Experiment:
    """Lock-step run of one RF scenario with one node harness per node.

    ``roles`` lists the roles of nodes ``0..len(roles)-1``; any further
    scenario nodes are silent. ``node_opts`` maps a role to keyword options
    for that role's harness. ``tuning_hz`` pins every node's receiver to a
    frequency (nodes otherwise follow the carrier), and ``retune`` is a list
    of ``(t_ms, node_id, freq_hz)`` events applied at block boundaries.

    With ``fast_forward`` the loop skips spans where every node is idle;
    outputs are identical to a full run because noise is keyed on absolute
    sample index and idle nodes send zeros.
    """

    def __init__(self, exp_id, rf: RfScenario, roles, workdir, *, traffic: TrafficScenario = None,
                 seed=0, block_size=DEFAULT_BLOCK_SIZE, node_opts=None, tuning_hz=None,
                 retune=(), fast_forward=True, iq_dump=False):
        if len(roles) > rf.n_nodes:
            raise ValueError(f"{len(roles)} roles for a {rf.n_nodes}-node scenario")
        self.exp_id = exp_id
        self.rf = rf
        self.traffic = traffic
        self.seed = seed
        self.workdir = Path(workdir)
        self.workdir.mkdir(parents=True, exist_ok=True)
        self.fast_forward = fast_forward
        self.iq_dump = iq_dump
        self.engine = Engine(EngineConfig(rf.n_nodes, rf.sample_rate_hz, block_size,
                                          rf.noise_power_dbfs, seed))
        self.playback = Playback(rf, self.engine)
        if tuning_hz is not None:
            self.engine.set_tuning([NodeTuning(j, float(tuning_hz)) for j in range(rf.n_nodes)])
        fs = rf.sample_rate_hz
        self._retune = sorted(((update_boundary(t, fs, block_size), i, node, float(f))
                               for i, (t, node, f) in enumerate(retune)))
        self.flow_log = FlowLog()
        self.hub = TrafficHub(self.flow_log)
        node_opts = node_opts or {}
        all_roles = list(roles) + ["silent"] * (rf.n_nodes - len(roles))
        self.nodes = [run_node(role, j, self.engine, self.hub, clock=0, log_dir=self.workdir,
                               **dict(node_opts.get(role, {})))
                      for j, role in enumerate(all_roles)]
        self._source = schedule(traffic, seed, rf.duration_ms) if traffic is not None else None
        self.skipped_blocks = 0
        self._finished = False

    # -- loop ------------------------------------------------------------

    def _t_ms(self, sample):
        return sample * 1000.0 / self.engine.sample_rate_hz

    def _packet_boundary(self):
        """First block start at which the next packet would be dispatched."""
        if self._source is None:
            return math.inf
        t = self._source.peek_time()
        if t == math.inf:
            return math.inf
        b = self.engine.block_size
        s = -(-_ms_to_sample(t, self.engine.sample_rate_hz) // b) * b
        while s >= b and self._t_ms(s - b) >= t:
            s -= b
        while self._t_ms(s) < t:
            s += b
        return s

    def _apply_retune(self, clock):
        while self._retune and self._retune[0][0] <= clock:
            _, _, node, f = self._retune.pop(0)
            self.engine.set_tuning([NodeTuning(node, f)])

    def _dispatch(self, t0):
        if self._source is None:
            return
        t_ms = self._t_ms(t0)
        while self._source.peek_time() <= t_ms:
            p = next(self._source)
            node = self.nodes[p.src_node]
            self.hub.dispatch(p, node if isinstance(node, ModemEndpointNode) else None)

    def _skip_target(self, t0, end):
        b = self.engine.block_size
        idle = min(n.idle_until(t0) for n in self.nodes)
        target = min(idle, self.playback.next_boundary, self._packet_boundary(), end,
                     self._retune[0][0] if self._retune else math.inf)
        if target == math.inf:
            return t0
        return max(t0, int(target) // b * b)

    def step(self):
        eng = self.engine
        t0 = eng.clock
        self.playback.before_block()
        self._apply_retune(t0)
        self._dispatch(t0)
        x = np.stack([n.tx(t0) for n in self.nodes])
        y = eng.process(x)
        for j, n in enumerate(self.nodes):
            n.rx(t0, y[j])
        if self.iq_dump:
            for j in range(eng.n_nodes):
                append_iq(iq_path(self.workdir, j), y[j])

    def run(self, duration_s):
        """Advance until ``duration_s`` of emulated time has elapsed."""
        eng = self.engine
        b = eng.block_size
        end = -(-math.ceil(Fraction(duration_s) * Fraction(eng.sample_rate_hz)) // b) * b
        while eng.clock < end:
            if self.fast_forward and not self.iq_dump:
                self.playback.before_block()
                self._apply_retune(eng.clock)
                target = self._skip_target(eng.clock, end)
                if target > eng.clock:
                    n = (target - eng.clock) // b
                    for node in self.nodes:
                        node.skip(n)
                    eng.fast_forward(n)
                    self.skipped_blocks += n
                    continue
            self.step()
        return self

    # -- teardown --------------------------------------------------------

    def check_lockstep(self):
        for n in self.nodes:
            if n.ticks != self.engine.blocks_processed:
                raise TickStarvationError(
                    f"node {n.node_id} saw {n.ticks} ticks, engine ran {self.engine.blocks_processed}")

    def finish(self) -> ExperimentResult:
        """Close nodes and write flows.csv, scenario copies and result.json."""
        if self._finished:
            raise RuntimeError("experiment already finished")
        self._finished = True
        self.check_lockstep()
        for n in self.nodes:
            n.close()
        duration_ms = self.engine.clock * 1000.0 / self.engine.sample_rate_hz
        self.flow_log.close()
        self.flow_log.write_csv(self.workdir / "flows.csv")
        (self.workdir / "scenario.rfscn").write_bytes(serialize_rf_scenario(self.rf))
        if self.traffic is not None:
            (self.workdir / "traffic.tgen").write_text(serialize_traffic_script(self.traffic))
        flows = {}
        if duration_ms > 0:
            for fid, m in metrics(self.flow_log, duration_ms).items():
                flows[fid] = {"sent": m.sent, "delivered": m.delivered, "lost": m.lost,
                              "loss_rate": _finite(m.loss_rate),
                              "throughput_bps": m.throughput_bps,
                              "latency_p50_ms": _finite(m.latency_p50_ms),
                              "latency_p95_ms": _finite(m.latency_p95_ms)}
        probes = {n.node_id: [[self._t_ms(s), snr] for s, snr in n.estimates]
                  for n in self.nodes if isinstance(n, ProbeRxNode)}
        result = ExperimentResult(self.exp_id, duration_ms / 1000.0, self.engine.blocks_processed,
                                  self.skipped_blocks, flows, probes)
        (self.workdir / "result.json").write_text(
            json.dumps(result.to_dict(), indent=1, sort_keys=True) + "\n")
        return result


def run_experiment(exp_id, rf, roles, workdir, duration_s, **kwargs) -> ExperimentResult:
    exp = Experiment(exp_id, rf, roles, workdir, **kwargs)
    exp.run(duration_s)
    return exp.finish()
