"""On-disk state directory shared by CLI invocations.

Layout::

    config.json        pool size and token rate
    ledger.json        team balances
    reservations.json  interactive reservations
    jobs.json          every batch record, in submission order
    catalogue/         installed .rfscn / .tgen scenarios
    queue/             one .job.json per pending job
    work/              logs of running experiments
    archive/<exp_id>/  immutable archives

Mutating commands hold an exclusive ``flock`` on ``.lock``; read-only
commands take a shared lock.
"""

import contextlib
import fcntl
import json
import os
from pathlib import Path

from ..scenario.catalogue import Catalogue
from ..scenario.jobs import serialize_batch_job
from .ledger import DEFAULT_RATE, TokenLedger
from .resources import NodePool, Reservation, ResourceManager, ResState
from .scheduler import BatchScheduler, ExperimentRecord, JobState

DEFAULT_POOL_SIZE = 16


def _write_json(path, obj):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
    os.replace(tmp, path)


def _read_json(path, default):
    return json.loads(path.read_text()) if path.exists() else default


class StateDir:
    def __init__(self, root):
        self.root = Path(root)
        for sub in ("catalogue", "queue", "work", "archive"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self.catalogue = Catalogue(self.root / "catalogue")

    @contextlib.contextmanager
    def lock(self, exclusive=True):
        with open(self.root / ".lock", "a+") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    # -- load / save -----------------------------------------------------

    def config(self):
        return _read_json(self.root / "config.json",
                          {"pool_size": DEFAULT_POOL_SIZE, "rate_tokens_per_node_hour": DEFAULT_RATE})

    def save_config(self, cfg):
        _write_json(self.root / "config.json", cfg)

    def load(self, runner=None) -> BatchScheduler:
        cfg = self.config()
        ledger = TokenLedger.from_dict(_read_json(self.root / "ledger.json", {}))
        res = [Reservation.from_dict(d) for d in _read_json(self.root / "reservations.json", [])]
        recs = [ExperimentRecord.from_dict(d) for d in _read_json(self.root / "jobs.json", [])]
        used = [n for r in res if r.state is ResState.ACTIVE for n in r.nodes]
        used += [n for r in recs if r.state is JobState.RUNNING for n in r.nodes]
        rm = ResourceManager(ledger, NodePool(cfg["pool_size"], used), cfg["rate_tokens_per_node_hour"])
        rm.reservations = {r.id: r for r in res}
        rm._counter = len(res)
        sched = BatchScheduler(rm, self.catalogue, self.root / "work", self.root / "archive", runner)
        sched.records = {r.id: r for r in recs}
        sched.queue = [r.id for r in recs if r.state is JobState.PENDING]
        sched._counter = len(recs)
        return sched

    def save(self, sched: BatchScheduler):
        rm = sched.resources
        _write_json(self.root / "ledger.json", rm.ledger.to_dict())
        _write_json(self.root / "reservations.json",
                    [r.to_dict() for r in rm.reservations.values()])
        _write_json(self.root / "jobs.json", [r.to_dict() for r in sched.records.values()])
        qdir = self.root / "queue"
        pending = set(sched.queue)
        for f in qdir.glob("*.job.json"):
            if f.name.removesuffix(".job.json") not in pending:
                f.unlink()
        for jid in sched.queue:
            f = qdir / f"{jid}.job.json"
            if not f.exists():
                f.write_bytes(serialize_batch_job(sched.records[jid].spec))
