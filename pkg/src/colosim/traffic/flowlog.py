"""Per-flow delivery log, flow metrics and CSV export."""

import math
from dataclasses import dataclass


class FlowLogError(ValueError):
    pass


class _Lost:
    def __repr__(self):
        return "LOST"


LOST = _Lost()


@dataclass
class _Rec:
    sent_ms: float
    size: int
    recv_ms: object = None  # float, LOST, or None while in flight


@dataclass(frozen=True)
class FlowMetrics:
    sent: int
    delivered: int
    lost: int
    throughput_bps: float
    loss_rate: float
    latency_p50_ms: float
    latency_p95_ms: float


class FlowLog:
    def __init__(self):
        self._flows = {}
        self.closed = False

    def record_sent(self, packet):
        if self.closed:
            raise FlowLogError("log is closed")
        recs = self._flows.setdefault(packet.flow_id, {})
        if packet.seq in recs:
            raise FlowLogError(f"flow {packet.flow_id} seq {packet.seq} already sent")
        if recs and packet.seq <= max(recs):
            raise FlowLogError(f"flow {packet.flow_id}: seq must increase")
        recs[packet.seq] = _Rec(packet.sent_at_ms, packet.size_bytes)

    def _get(self, flow_id, seq):
        try:
            return self._flows[flow_id][seq]
        except KeyError:
            raise FlowLogError(f"flow {flow_id} seq {seq} was never sent") from None

    def record_delivery(self, packet, received_at_ms):
        """``received_at_ms`` is a time or :data:`LOST`. One record per packet."""
        rec = self._get(packet.flow_id, packet.seq)
        if rec.recv_ms is not None:
            raise FlowLogError(f"duplicate delivery record for flow {packet.flow_id} seq {packet.seq}")
        if received_at_ms is not LOST:
            if received_at_ms < rec.sent_ms:
                raise FlowLogError("received_at precedes sent_at")
            received_at_ms = float(received_at_ms)
        rec.recv_ms = received_at_ms

    def is_resolved(self, flow_id, seq):
        return self._get(flow_id, seq).recv_ms is not None

    def close(self):
        """Mark everything still in flight as lost."""
        for recs in self._flows.values():
            for rec in recs.values():
                if rec.recv_ms is None:
                    rec.recv_ms = LOST
        self.closed = True

    def flows(self):
        return sorted(self._flows)

    def records(self, flow_id):
        """(seq, sent_ms, recv_ms or None, size) in seq order."""
        out = []
        for seq, r in sorted(self._flows[flow_id].items()):
            recv = None if r.recv_ms is LOST else r.recv_ms
            out.append((seq, r.sent_ms, recv, r.size))
        return out

    def csv_text(self):
        lines = ["flow,seq,sent_ms,recv_ms,size"]
        for fid in self.flows():
            for seq, sent, recv, size in self.records(fid):
                r = "" if recv is None else f"{recv:.6f}"
                lines.append(f"{fid},{seq},{sent:.6f},{r},{size}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv_text())


def nearest_rank(sorted_values, pct):
    if not sorted_values:
        return math.nan
    rank = max(1, math.ceil(pct / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


def metrics(log: FlowLog, window_ms):
    """Per-flow throughput (delivered bits / window), loss rate and latency percentiles."""
    if not window_ms > 0:
        raise FlowLogError("empty measurement window")
    if not log.closed:
        raise FlowLogError("metrics need a closed log")
    out = {}
    for fid in log.flows():
        recs = log.records(fid)
        delivered = [(r[2] - r[1], r[3]) for r in recs if r[2] is not None]
        lat = sorted(d for d, _ in delivered)
        n_sent = len(recs)
        n_del = len(delivered)
        out[fid] = FlowMetrics(
            sent=n_sent,
            delivered=n_del,
            lost=n_sent - n_del,
            throughput_bps=sum(s for _, s in delivered) * 8 / (window_ms / 1000.0),
            loss_rate=(n_sent - n_del) / n_sent if n_sent else 0.0,
            latency_p50_ms=nearest_rank(lat, 50),
            latency_p95_ms=nearest_rank(lat, 95),
        )
    return out
