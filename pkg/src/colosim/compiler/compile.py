"""Geometry to tap-timeline compilation."""

import numpy as np

from ..channel import HISTORY, SPEED_OF_LIGHT, CirTaps
from ..scenario.model import RfScenario, TapUpdate, validate_rf_scenario
from .geometry import TerrainBounds, positions_at
from .propagation import ChannelModelParams, CompileError, fading_factors, pathloss_gain

DEFAULT_UPDATE_PERIOD_MS = 1000


def link_id(tx, rx, n_nodes):
    return tx * n_nodes + rx


def _pair_taps(d, base_gain, factors, excess_k, fs):
    """Merge LoS and excess taps into a strictly increasing (k, g) tuple."""
    k0 = int(round(d / SPEED_OF_LIGHT * fs))
    acc = {}
    for m, f in enumerate(factors):
        k = k0 + (excess_k[m - 1] if m else 0)
        acc[k] = acc.get(k, 0j) + base_gain * f
    return tuple(sorted(acc.items()))


def compile_scenario(trajectories, params: ChannelModelParams, terrain: TerrainBounds, fs,
                     carrier_hz, duration_ms, update_period_ms=DEFAULT_UPDATE_PERIOD_MS, *,
                     scenario_id="compiled", noise_power_dbfs=-100.0, n_nodes=None) -> RfScenario:
    """One TapUpdate every ``update_period_ms``; each directed pair gets
    delay tap + pathloss gain (+ fading / multipath taps).

    Distances shorter than the model's reference distance are clamped to it.
    """
    if duration_ms <= 0:
        raise CompileError("duration must be > 0")
    if update_period_ms <= 0:
        raise CompileError("update period must be > 0")
    trajectories = sorted(trajectories, key=lambda tr: tr.node_id)
    n = len(trajectories)
    if n_nodes is not None and n_nodes != n:
        raise CompileError(f"node count mismatch: {n} trajectories for n_nodes={n_nodes}")
    if [tr.node_id for tr in trajectories] != list(range(n)):
        raise CompileError("trajectories must cover node ids 0..N-1 exactly once")
    if n < 2:
        raise CompileError("need at least two nodes")
    for tr in trajectories:
        tr.check_span(duration_ms)
        tr.check_bounds(terrain)
    params.check_window(fs)
    excess_k = [int(round(dly * fs)) for dly, _ in params.multipath_profile]
    max_excess = max(excess_k, default=0)
    d0 = params.reference_distance_m

    iu, ju = np.nonzero(~np.eye(n, dtype=bool))
    lids = iu * n + ju
    updates = []
    for t in range(0, int(duration_ms), int(update_period_ms)):
        pos = positions_at(trajectories, t)
        diff = pos[iu] - pos[ju]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        worst = float(dist.max())
        if worst / SPEED_OF_LIGHT * fs + max_excess > HISTORY:
            raise CompileError(
                f"t={t} ms: link of {worst:.1f} m needs "
                f"{worst / SPEED_OF_LIGHT * fs + max_excess:.1f} samples of delay; "
                f"the tap window holds {HISTORY} "
                f"(max distance {HISTORY / fs * SPEED_OF_LIGHT:.1f} m at fs={fs})")
        gains = pathloss_gain(np.maximum(dist, d0), carrier_hz, params)
        fac = fading_factors(params, t, lids)
        links = tuple(
            CirTaps(int(i), int(j), _pair_taps(float(d), complex(g), f, excess_k, fs))
            for i, j, d, g, f in zip(iu, ju, dist, gains, fac))
        updates.append(TapUpdate(t, links))
    scn = RfScenario(scenario_id, n, int(duration_ms), float(fs), float(carrier_hz),
                     float(noise_power_dbfs), tuple(updates))
    validate_rf_scenario(scn)
    return scn
