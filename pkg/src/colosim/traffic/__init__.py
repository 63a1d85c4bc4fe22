"""Traffic generation: flow schedules, delivery logs and flow metrics."""

from .flowlog import LOST, FlowLog, FlowLogError, FlowMetrics, metrics, nearest_rank
from .schedule import BURST_DUTY, BURST_PERIOD_MS, Packet, PacketSource, offered_load_bps, schedule


def record_delivery(log, packet, received_at_ms):
    log.record_delivery(packet, received_at_ms)
