import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from colosim.scenario.model import FlowEvent, FlowKind, Pattern, TrafficScenario
from colosim.traffic import (
    BURST_PERIOD_MS,
    LOST,
    FlowLog,
    FlowLogError,
    Packet,
    metrics,
    nearest_rank,
    offered_load_bps,
    record_delivery,
    schedule,
)


def flow(pattern, rate=10.0, size=1024, t_on=0, off=None, fid=1):
    events = [FlowEvent(t_on, FlowKind.ON, fid, 0, 1, Pattern(pattern), rate, size)]
    if off is not None:
        events.append(FlowEvent(off, FlowKind.OFF, fid))
    return TrafficScenario("t", tuple(events))


def test_periodic_exact_spacing():
    pk = list(schedule(flow("PERIODIC"), end_ms=10_000))
    assert len(pk) == 100
    assert [p.sent_at_ms for p in pk] == pytest.approx([100.0 * i for i in range(100)])
    assert [p.seq for p in pk] == list(range(100))
    assert all(p.size_bytes == 1024 and len(p.payload()) == 1024 for p in pk)


def test_periodic_starts_at_on_time():
    pk = list(schedule(flow("PERIODIC", t_on=250), end_ms=1250))
    assert pk[0].sent_at_ms == 250 and len(pk) == 10


def test_poisson_statistics():
    pk = list(schedule(flow("POISSON"), seed=3, end_ms=1_000_000))
    assert abs(len(pk) - 10_000) <= 300
    gaps = np.diff([0.0] + [p.sent_at_ms for p in pk])
    assert np.mean(gaps) == pytest.approx(100.0, rel=0.05)
    # exponential: coefficient of variation near 1
    assert np.std(gaps) / np.mean(gaps) == pytest.approx(1.0, abs=0.05)


def test_poisson_reproducible_and_seeded():
    a = [p.sent_at_ms for p in schedule(flow("POISSON"), seed=1, end_ms=10_000)]
    b = [p.sent_at_ms for p in schedule(flow("POISSON"), seed=1, end_ms=10_000)]
    c = [p.sent_at_ms for p in schedule(flow("POISSON"), seed=2, end_ms=10_000)]
    assert a == b and a != c


def test_burst_duty_cycle():
    pk = list(schedule(flow("BURST", rate=100), end_ms=10_000))
    assert len(pk) == 500
    phase = np.array([p.sent_at_ms for p in pk]) % BURST_PERIOD_MS
    assert np.all(phase < BURST_PERIOD_MS / 2)


def test_off_stops_flow():
    pk = list(schedule(flow("PERIODIC", off=30_000), end_ms=60_000))
    assert max(p.sent_at_ms for p in pk) < 30_000
    assert len(pk) == 300


def test_packets_time_ordered_with_flow_tiebreak():
    events = tuple(FlowEvent(0, FlowKind.ON, f, 0, 1, Pattern.PERIODIC, 10.0, 100) for f in (2, 1))
    pk = list(schedule(TrafficScenario("t", events), end_ms=1000))
    keys = [(p.sent_at_ms, p.flow_id) for p in pk]
    assert keys == sorted(keys)


def test_offered_load():
    assert offered_load_bps(flow("PERIODIC"), 0, 1000) == 81_920
    assert offered_load_bps(flow("BURST"), 0, 1000) == 40_960
    assert offered_load_bps(flow("PERIODIC", t_on=500), 0, 1000) == 0


def test_payload_deterministic():
    p = Packet(3, 7, 0, 1, 40, 0.0)
    assert p.payload() == Packet(3, 7, 0, 1, 40, 5.0).payload()
    assert p.payload() != Packet(3, 8, 0, 1, 40, 0.0).payload()


# -- flow log -----------------------------------------------------------------

def sent_log(n=3, size=100):
    log = FlowLog()
    pk = [Packet(1, i, 0, 1, size, 10.0 * i) for i in range(n)]
    for p in pk:
        log.record_sent(p)
    return log, pk


def test_latency():
    log, pk = sent_log()
    record_delivery(log, pk[0], 15.0)
    record_delivery(log, pk[1], LOST)
    log.close()
    assert log.records(1)[0] == (0, 0.0, 15.0, 100)
    m = metrics(log, 1000)[1]
    assert m.latency_p50_ms == 15.0
    assert (m.sent, m.delivered, m.lost) == (3, 1, 2)


def test_delivery_errors():
    log, pk = sent_log()
    record_delivery(log, pk[0], 1.0)
    with pytest.raises(FlowLogError, match="duplicate"):
        record_delivery(log, pk[0], 2.0)
    with pytest.raises(FlowLogError, match="precedes"):
        record_delivery(log, pk[1], 5.0)
    with pytest.raises(FlowLogError, match="never sent"):
        record_delivery(log, Packet(9, 0, 0, 1, 1, 0.0), 1.0)
    with pytest.raises(FlowLogError):
        log.record_sent(pk[0])


def test_metrics_throughput():
    log = FlowLog()
    for i in range(100):
        p = Packet(1, i, 0, 1, 1024, 100.0 * i)
        log.record_sent(p)
        log.record_delivery(p, 100.0 * i + 3)
    log.close()
    m = metrics(log, 10_000)[1]
    assert m.throughput_bps == 81_920
    assert m.loss_rate == 0
    assert m.latency_p95_ms == pytest.approx(3.0)


def test_all_lost():
    log, _ = sent_log()
    log.close()
    m = metrics(log, 1000)[1]
    assert m.loss_rate == 1.0 and m.throughput_bps == 0
    assert math.isnan(m.latency_p50_ms)


def test_metrics_preconditions():
    log, _ = sent_log()
    with pytest.raises(FlowLogError, match="closed"):
        metrics(log, 1000)
    log.close()
    with pytest.raises(FlowLogError, match="empty"):
        metrics(log, 0)


def test_nearest_rank():
    v = [15, 20, 35, 40, 50]
    assert nearest_rank(v, 30) == 20
    assert nearest_rank(v, 40) == 20
    assert nearest_rank(v, 50) == 35
    assert nearest_rank(v, 100) == 50
    assert nearest_rank([7], 95) == 7


def test_csv_export():
    log, pk = sent_log(2)
    record_delivery(log, pk[0], 12.5)
    log.close()
    assert log.csv_text() == ("flow,seq,sent_ms,recv_ms,size\n"
                              "1,0,0.000000,12.500000,100\n"
                              "1,1,10.000000,,100\n")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["ok", "lost", "pending"]), min_size=1, max_size=40))
def test_conservation(outcomes):
    log = FlowLog()
    for i, o in enumerate(outcomes):
        p = Packet(1, i, 0, 1, 10, float(i))
        log.record_sent(p)
        if o == "ok":
            log.record_delivery(p, i + 1.0)
        elif o == "lost":
            log.record_delivery(p, LOST)
    log.close()
    m = metrics(log, 100)[1]
    assert m.sent == m.delivered + m.lost == len(outcomes)
    assert m.delivered == outcomes.count("ok")
