"""SINR measurement between candidate relays and destinations, and the
matching-vs-random relay selection experiment."""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .. import rng
from ..channel import HISTORY, Engine, EngineConfig
from ..radio.estimate import PnProbe, ProbeNotFoundError, fit_probe
from ..scenario.model import RfScenario
from .matching import assignment_weight, max_weight_matching, random_assignment

DEFAULT_PROBE_LEN = 4096
_INTERFERER_STREAM = 7


@dataclass(frozen=True)
class SinrMatrix:
    relays: tuple
    destinations: tuple
    weights: np.ndarray  # dB, relays x destinations

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (len(self.relays), len(self.destinations)):
            raise ValueError("weights shape does not match relays x destinations")
        if not np.all(np.isfinite(w)):
            raise ValueError("SINR entries must be finite")


def engine_at(rf: RfScenario, t_ms, seed=0, block_size=1024) -> Engine:
    """Fresh engine holding the taps in effect at ``t_ms``."""
    eng = Engine(EngineConfig(rf.n_nodes, rf.sample_rate_hz, block_size, rf.noise_power_dbfs, seed))
    for u in rf.updates:
        if u.t_ms > t_ms:
            break
        eng.set_taps(u.links, rf.carrier_hz if u.carrier_hz is None else u.carrier_hz)
    return eng


def _engine(handle):
    return handle if isinstance(handle, Engine) else handle.engine


def measure_sinr_matrix(handle, relays, destinations, interferers=(), *,
                        probe_len=DEFAULT_PROBE_LEN, seed=0, amplitude=1.0) -> SinrMatrix:
    """One probe epoch per relay: the relay sends its PN probe while every
    interferer sends independent random chips; each destination estimates
    the relay's SINR. Raises ProbeNotFoundError listing every failed pair.
    """
    eng = _engine(handle)
    relays, destinations = tuple(relays), tuple(destinations)
    if set(relays) & set(destinations):
        raise ValueError("relays and destinations must be disjoint")
    b = eng.block_size
    n_blocks = -(-(probe_len + HISTORY) // b)
    total = n_blocks * b
    w = np.empty((len(relays), len(destinations)))
    failed = []
    for ri, r in enumerate(relays):
        probe = PnProbe(probe_len, rng.stream_key(seed, rng.DOMAIN_PN, r)).samples
        x = np.zeros((eng.n_nodes, total), dtype=np.complex128)
        x[r, :probe_len] = amplitude * probe
        for i in interferers:
            if i == r:
                continue
            key = rng.stream_key(seed, _INTERFERER_STREAM, r, i)
            x[i, :probe_len] = amplitude * rng.pn_chips(key, 0, probe_len)
        y = np.concatenate([eng.process(x[:, k * b:(k + 1) * b]) for k in range(n_blocks)], axis=1)
        for di, d in enumerate(destinations):
            try:
                w[ri, di] = fit_probe(probe, y[d]).snr_db
            except ProbeNotFoundError:
                failed.append((r, d))
    if failed:
        pairs = ", ".join(f"{r}->{d}" for r, d in failed)
        raise ProbeNotFoundError(f"probe not found on {len(failed)} pair(s): {pairs}")
    return SinrMatrix(relays, destinations, w)


def split_squad(group):
    """Default roles: the UAV plus the first half of the walkers relay, the
    remaining walkers are destinations."""
    walkers = list(group["walkers"])
    half = len(walkers) // 2
    return [group["uav"]] + walkers[:half], walkers[half:]


@dataclass(frozen=True)
class RelayReport:
    rows: tuple  # (squad, strategy, mean_sinr_db)

    def mean(self, squad, strategy):
        for s, st, v in self.rows:
            if s == squad and st == strategy:
                return v
        raise KeyError((squad, strategy))

    def csv_text(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["squad", "strategy", "mean_sinr_db"])
        for s, st, v in self.rows:
            wr.writerow([s, st, f"{v:.6f}"])
        return buf.getvalue()


def run_relay_experiment(squads, scenario: RfScenario, seeds, *, times_ms=None,
                         probe_len=DEFAULT_PROBE_LEN, interfere=True, block_size=1024) -> RelayReport:
    """Per-squad mean relay-link SINR under matching and random selection.

    At each measurement time and seed every squad measures its relay x
    destination SINR matrix while one relay from each other squad transmits
    (inter-squad interference). Both strategies are scored on the same
    matrix; the squad mean averages the chosen links over times and seeds.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    if times_ms is None:
        times_ms = [0, scenario.duration_ms // 2]
    splits = [split_squad(g) for g in squads]
    acc = {(si, st): [] for si in range(len(squads)) for st in ("matching", "random")}
    for t in times_ms:
        for seed in seeds:
            eng = engine_at(scenario, t, seed, block_size)
            for si, (relays, dests) in enumerate(splits):
                others = [splits[o][0][0] for o in range(len(splits)) if o != si] if interfere else []
                m = measure_sinr_matrix(eng, relays, dests, others, probe_len=probe_len, seed=seed)
                k = len(relays)
                best = max_weight_matching(m.weights)
                rand = random_assignment(m.weights, rng.stream_key(seed, rng.DOMAIN_ASSIGN, si, t))
                acc[(si, "matching")].append(assignment_weight(m.weights, best) / k)
                acc[(si, "random")].append(assignment_weight(m.weights, rand) / k)
    rows = tuple((squads[si].get("squad", si), st, float(np.mean(acc[(si, st)])))
                 for si in range(len(squads)) for st in ("matching", "random"))
    return RelayReport(rows)
