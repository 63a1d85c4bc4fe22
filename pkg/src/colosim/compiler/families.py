"""Generators for three scenario families: SCE qualification, Alleys of
Austin-style squads, and cellular cells with mobile users.

Every numeric choice the family descriptions leave open is a keyword
argument; the defaults are stand-ins, not canon.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..channel import CirTaps
from ..scenario.model import (
    FlowEvent,
    FlowKind,
    Pattern,
    RfScenario,
    TapUpdate,
    TrafficScenario,
    validate_rf_scenario,
    validate_traffic,
)
from .compile import compile_scenario
from .geometry import NodeTrajectory, TerrainBounds, Waypoint
from .propagation import ChannelModelParams, CompileError, snr_to_gain

GHZ = 1e9


@dataclass
class GeneratedScenario:
    rf: RfScenario
    traffic: TrafficScenario
    trajectories: list = field(default_factory=list)
    terrain: TerrainBounds | None = None
    # family-specific structure, e.g. squads or cells
    groups: list = field(default_factory=list)

    def __iter__(self):
        yield self.rf
        yield self.traffic


def _on(t_ms, flow, src, dst, pattern, rate, size):
    return FlowEvent(t_ms, FlowKind.ON, flow, src, dst, Pattern(pattern), float(rate), int(size))


def _traffic(scenario_id, events):
    events = sorted(events, key=lambda e: e.t_ms)
    t = TrafficScenario(scenario_id, tuple(events))
    validate_traffic(t)
    return t


# -- SCE qualification -----------------------------------------------------

SCE_SNR_SCHEDULE_DB = (20.0, 15.0, 10.0, 5.0)
SCE_EPOCH_MS = 120_000


def gen_sce_qualification(fs=1e6, noise_dbfs=-80.0, *, n_nodes=10, carrier_hz=1.0 * GHZ,
                          shifted_carrier_hz=1.1 * GHZ, tx_power_dbfs=0.0,
                          cbr_pps=10.0, cbr_bytes=1250, scenario_id="sce_qual_v1"):
    """10 nodes, 10 minutes. SNR 20 dB dropping 5 dB every 2 minutes; the
    final 2 minutes move the carrier to 1.1 GHz with SNR back at 20 dB.
    Traffic: each node streams constant-bitrate UDP to its successor."""
    pairs = [(i, j) for i in range(n_nodes) for j in range(n_nodes) if i != j]

    def mesh(snr_db):
        g = snr_to_gain(snr_db, noise_dbfs, tx_power_dbfs)
        return tuple(CirTaps(i, j, ((0, complex(g)),)) for i, j in pairs)

    updates = [TapUpdate(e * SCE_EPOCH_MS, mesh(snr)) for e, snr in enumerate(SCE_SNR_SCHEDULE_DB)]
    updates.append(TapUpdate(len(SCE_SNR_SCHEDULE_DB) * SCE_EPOCH_MS, mesh(SCE_SNR_SCHEDULE_DB[0]),
                             carrier_hz=float(shifted_carrier_hz)))
    duration = (len(SCE_SNR_SCHEDULE_DB) + 1) * SCE_EPOCH_MS
    rf = RfScenario(scenario_id, n_nodes, duration, float(fs), float(carrier_hz),
                    float(noise_dbfs), tuple(updates))
    validate_rf_scenario(rf)
    events = [_on(0, i + 1, i, (i + 1) % n_nodes, "PERIODIC", cbr_pps, cbr_bytes)
              for i in range(n_nodes)]
    return GeneratedScenario(rf, _traffic(scenario_id, events))


# -- Alleys of Austin ------------------------------------------------------

ALLEYS_STAGE_MS = 300_000


def _walker(node_id, x0, y0, leg_m, speed, duration_ms):
    leg_ms = int(round(leg_m / speed * 1000))
    wps = []
    t = 0
    forward = True
    while True:
        x = x0 if forward else x0 + leg_m
        wps.append(Waypoint(t, x, y0, 0.0))
        if t >= duration_ms:
            break
        t += leg_ms
        forward = not forward
    return NodeTrajectory(node_id, tuple(wps))


def _orbit(node_id, centre_traj, radius, altitude, speed, duration_ms, step_ms=1000):
    omega = speed / radius / 1000.0  # rad per ms
    wps = []
    for t in range(0, duration_ms + step_ms, step_ms):
        c = centre_traj(t)
        wps.append(Waypoint(t, c[0] + radius * math.cos(omega * t),
                            c[1] + radius * math.sin(omega * t), altitude))
    return NodeTrajectory(node_id, tuple(wps))


def gen_alleys(fs=1e6, *, n_squads=5, walkers_per_squad=9, duration_ms=900_000,
               walk_speed_mps=1.5, row_spacing_m=5.0, leg_m=180.0,
               uav_altitude_m=60.0, uav_orbit_radius_m=25.0, uav_speed_mps=10.0,
               carrier_hz=1.0 * GHZ, noise_dbfs=-100.0,
               params: ChannelModelParams = ChannelModelParams(),
               update_period_ms=10_000, stage_rates_bps=(16_000, 266_000, 1_000_000),
               scenario_id="alleys_of_austin"):
    """Squads of pedestrians walking abreast (ping-pong along a street) with
    one UAV orbiting each squad. Three traffic stages of escalating rate:
    voice, then voice + image/video, then high-rate.

    ``groups`` holds one dict per squad: ``{"walkers": [...], "uav": id}``.
    """
    terrain = TerrainBounds(1000.0, 1000.0)
    squad_size = walkers_per_squad + 1
    y_pitch = min(180.0, (terrain.height_m - 200.0) / max(n_squads, 1))
    trajectories = []
    groups = []
    for s in range(n_squads):
        x0 = 150.0 + 100.0 * (s % 2)
        y0 = 100.0 + s * y_pitch
        base = s * squad_size
        walkers = []
        for w in range(walkers_per_squad):
            trajectories.append(_walker(base + w, x0, y0 + w * row_spacing_m, leg_m,
                                        walk_speed_mps, duration_ms))
            walkers.append(base + w)
        lead = trajectories[base]
        mid_y = y0 + (walkers_per_squad - 1) * row_spacing_m / 2

        def centre(t, lead=lead, mid_y=mid_y):
            return (lead.position(t)[0], mid_y)

        uav = base + walkers_per_squad
        trajectories.append(_orbit(uav, centre, uav_orbit_radius_m, uav_altitude_m,
                                   uav_speed_mps, duration_ms))
        groups.append({"squad": s, "walkers": walkers, "uav": uav})
    rf = compile_scenario(trajectories, params, terrain, fs, carrier_hz, duration_ms,
                          update_period_ms, scenario_id=scenario_id, noise_power_dbfs=noise_dbfs)

    # stage rates are totals per node; each stage adds one flow on top of the previous ones
    voice_bps, stage2_bps, stage3_bps = stage_rates_bps
    layers = [
        ("PERIODIC", 40, voice_bps),
        ("POISSON", 1250, stage2_bps - voice_bps),
        ("PERIODIC", 1250, stage3_bps - stage2_bps),
    ]
    if any(bps <= 0 for _, _, bps in layers):
        raise CompileError("stage rates must strictly increase")
    events = []
    for g in groups:
        members = g["walkers"] + [g["uav"]]
        for idx, src in enumerate(members):
            dst = members[(idx + 1) % len(members)]
            for stage, (pattern, size, bps) in enumerate(layers):
                flow = 1 + src * len(layers) + stage
                events.append(_on(stage * ALLEYS_STAGE_MS, flow, src, dst, pattern,
                                  bps / (8.0 * size), size))
    return GeneratedScenario(rf, _traffic(scenario_id, events), trajectories, terrain, groups)


# -- cellular --------------------------------------------------------------

DISTANCE_CLASSES = {"close": 20.0, "medium": 50.0, "far": 100.0}
SPEED_CLASSES = {"static": 0.0, "moderate": 3.0, "fast": 5.0}
UES_PER_BS = 4


def gen_cellular(n_bs=10, distance_class="close", speed_class="static", fs=1e6, *,
                 duration_ms=600_000, carrier_hz=1.0 * GHZ, noise_dbfs=-100.0,
                 params: ChannelModelParams = ChannelModelParams(), update_period_ms=10_000,
                 downlink_bps=1_000_000, packet_bytes=1250, seed=0, scenario_id=None):
    """``n_bs`` base stations on a synthetic grid, four users per station at
    the class radius, circling their station at the class speed. Downlink
    video-like traffic of ``downlink_bps`` per user.

    Node ids: stations ``0..n_bs-1``, then users ``n_bs + 4*b + u``.
    """
    if not 8 <= n_bs <= 10:
        raise CompileError("n_bs must lie in [8, 10]")
    if distance_class not in DISTANCE_CLASSES:
        raise CompileError(f"distance class must be one of {sorted(DISTANCE_CLASSES)}")
    if speed_class not in SPEED_CLASSES:
        raise CompileError(f"speed class must be one of {sorted(SPEED_CLASSES)}")
    radius = DISTANCE_CLASSES[distance_class]
    speed = SPEED_CLASSES[speed_class]
    scenario_id = scenario_id or f"cellular_{n_bs}bs_{distance_class}_{speed_class}"
    terrain = TerrainBounds(1000.0, 1000.0)
    gen = np.random.default_rng(seed)
    cols = 4
    trajectories = []
    bs_pos = []
    for b in range(n_bs):
        x = 125.0 + 250.0 * (b % cols) + gen.uniform(-20, 20)
        y = 125.0 + 250.0 * (b // cols) + gen.uniform(-20, 20)
        bs_pos.append((x, y))
        trajectories.append(NodeTrajectory(b, (Waypoint(0, x, y, 0.0),)))
    groups = []
    for b, (bx, by) in enumerate(bs_pos):
        ues = []
        for u in range(UES_PER_BS):
            nid = n_bs + UES_PER_BS * b + u
            phase0 = 2 * math.pi * u / UES_PER_BS + gen.uniform(0, math.pi / 4)
            if speed == 0:
                wps = (Waypoint(0, bx + radius * math.cos(phase0), by + radius * math.sin(phase0)),)
            else:
                omega = speed / radius / 1000.0
                wps = tuple(Waypoint(t, bx + radius * math.cos(phase0 + omega * t),
                                     by + radius * math.sin(phase0 + omega * t))
                            for t in range(0, duration_ms + 1000, 1000))
            trajectories.append(NodeTrajectory(nid, wps))
            ues.append(nid)
        groups.append({"bs": b, "ues": ues, "radius_m": radius, "speed_mps": speed})
    rf = compile_scenario(trajectories, params, terrain, fs, carrier_hz, duration_ms,
                          update_period_ms, scenario_id=scenario_id, noise_power_dbfs=noise_dbfs)
    pps = downlink_bps / (8.0 * packet_bytes)
    events = [_on(0, ue + 1, g["bs"], ue, "PERIODIC", pps, packet_bytes)
              for g in groups for ue in g["ues"]]
    return GeneratedScenario(rf, _traffic(scenario_id, events), trajectories, terrain, groups)
