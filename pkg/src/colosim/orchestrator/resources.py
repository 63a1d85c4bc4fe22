"""Node pool and interactive reservations."""

from dataclasses import asdict, dataclass, field
from enum import Enum

from .ledger import DEFAULT_RATE, ResourceError, TokenLedger


class InsufficientNodesError(ResourceError):
    pass


class NodePool:
    def __init__(self, size, allocated=()):
        if size < 1:
            raise ValueError("pool size must be ≥ 1")
        self.size = size
        self._used = set(allocated)

    @property
    def free(self):
        return self.size - len(self._used)

    def allocate(self, n):
        if n > self.free:
            raise InsufficientNodesError(f"need {n} nodes, {self.free} of {self.size} free")
        ids = [i for i in range(self.size) if i not in self._used][:n]
        self._used.update(ids)
        return ids

    def release(self, ids):
        for i in ids:
            if i not in self._used:
                raise RuntimeError(f"node {i} released twice")
            self._used.discard(i)

    def used(self):
        return sorted(self._used)


class ResState(str, Enum):
    PENDING = "PENDING"
    ACTIVE = "ACTIVE"
    DONE = "DONE"
    CANCELLED = "CANCELLED"


@dataclass
class Reservation:
    id: str
    team: str
    n_nodes: int
    start: float
    duration_h: float
    cost: float
    state: ResState = ResState.PENDING
    nodes: list = field(default_factory=list)

    @property
    def end(self):
        return self.start + self.duration_h * 3600.0

    def to_dict(self):
        d = asdict(self)
        d["state"] = self.state.value
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["state"] = ResState(d["state"])
        return cls(**d)


class ResourceManager:
    """Single owner of the ledger and the node pool.

    Tokens are charged up front, once, when a reservation is granted.
    """

    def __init__(self, ledger: TokenLedger, pool: NodePool, rate=DEFAULT_RATE):
        self.ledger = ledger
        self.pool = pool
        self.rate = float(rate)
        self.reservations = {}
        self._counter = 0

    def cost(self, n_nodes, hours):
        return self.rate * n_nodes * hours

    def reserve(self, team, n_nodes, duration_h, now) -> Reservation:
        if n_nodes < 1 or duration_h <= 0:
            raise ValueError("need n_nodes ≥ 1 and duration_h > 0")
        self.tick(now)
        cost = self.cost(n_nodes, duration_h)
        self.ledger.account(team)
        if n_nodes > self.pool.size:
            raise InsufficientNodesError(f"pool has only {self.pool.size} nodes")
        if n_nodes > self.pool.free:
            raise InsufficientNodesError(f"need {n_nodes} nodes, {self.pool.free} free")
        self.ledger.charge(team, cost)
        self._counter += 1
        r = Reservation(f"r{self._counter:05d}", team, n_nodes, float(now), float(duration_h), cost)
        r.nodes = self.pool.allocate(n_nodes)
        r.state = ResState.ACTIVE
        self.reservations[r.id] = r
        return r

    def cancel(self, res_id):
        r = self.reservations[res_id]
        if r.state is ResState.ACTIVE:
            self.pool.release(r.nodes)
        r.state = ResState.CANCELLED

    def tick(self, now):
        self.ledger.weekly_reset(now)
        for r in self.reservations.values():
            if r.state is ResState.ACTIVE and r.end <= now:
                self.pool.release(r.nodes)
                r.state = ResState.DONE

    def active(self):
        return [r for r in self.reservations.values() if r.state is ResState.ACTIVE]
