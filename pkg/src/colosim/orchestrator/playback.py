"""Feeding a scenario's tap timeline into an engine at block boundaries."""

import math
from fractions import Fraction

from ..channel import ChannelError, Engine
from ..scenario.model import RfScenario


def update_sample(t_ms, fs):
    """Sample index of time ``t_ms``, rounded up (never early)."""
    return math.ceil(Fraction(t_ms) * Fraction(fs) / 1000)


def update_boundary(t_ms, fs, block_size):
    """First block boundary whose start time is at or after ``t_ms``."""
    s = update_sample(t_ms, fs)
    return -(-s // block_size) * block_size


class Playback:
    """Applies each TapUpdate just before the first block starting at or
    after its timestamp. Same-time updates go in file order."""

    def __init__(self, scenario: RfScenario, engine: Engine):
        if scenario.n_nodes != engine.n_nodes:
            raise ChannelError(
                f"scenario {scenario.id!r} has {scenario.n_nodes} nodes, engine has {engine.n_nodes}")
        if scenario.sample_rate_hz != engine.sample_rate_hz:
            raise ChannelError(
                f"scenario sample rate {scenario.sample_rate_hz:g} != engine {engine.sample_rate_hz:g}")
        self.scenario = scenario
        self.engine = engine
        fs, b = engine.sample_rate_hz, engine.block_size
        self.boundaries = [update_boundary(u.t_ms, fs, b) for u in scenario.updates]
        self._next = 0
        # skip updates whose boundary is already behind the engine clock
        while self._next < len(self.boundaries) and self.boundaries[self._next] < engine.clock:
            self._next += 1
        self.applied = []  # (update index, boundary sample)

    @property
    def next_boundary(self):
        if self._next < len(self.boundaries):
            return self.boundaries[self._next]
        return math.inf

    def before_block(self):
        """Stage every update due at the engine's current block boundary."""
        clock = self.engine.clock
        while self._next < len(self.boundaries) and self.boundaries[self._next] <= clock:
            u = self.scenario.updates[self._next]
            carrier = self.scenario.carrier_hz if u.carrier_hz is None else u.carrier_hz
            self.engine.set_taps(u.links, carrier)
            self.applied.append((self._next, clock))
            self._next += 1


def playback(rf_scenario: RfScenario, engine: Engine, clock=None) -> Playback:
    """Attach a scenario to an engine.

    ``clock`` is an optional iterable of ``(n_nodes, block_size)`` tx arrays;
    when given, each is run through the engine with updates applied on time.
    Otherwise the returned :class:`Playback` is stepped by the caller.
    """
    pb = Playback(rf_scenario, engine)
    if clock is not None:
        for x in clock:
            pb.before_block()
            engine.process(x)
    return pb
