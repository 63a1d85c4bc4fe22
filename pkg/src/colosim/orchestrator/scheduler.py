"""Strict-FIFO batch queue on top of the resource manager."""

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from ..scenario.catalogue import Catalogue
from ..scenario.errors import UnknownScenarioError
from ..scenario.jobs import job_to_dict, parse_batch_job
from ..scenario.model import BatchJobSpec
from .archive import ArchiveError, collect_logs
from .experiment import DEFAULT_BLOCK_SIZE, Experiment
from .ledger import InsufficientTokensError
from .resources import InsufficientNodesError, ResourceManager


class JobState(str, Enum):
    PENDING = "PENDING"
    RUNNING = "RUNNING"
    ARCHIVED = "ARCHIVED"
    FAILED = "FAILED"


@dataclass
class ExperimentRecord:
    id: str
    spec: BatchJobSpec
    submitted_at: float
    state: JobState = JobState.PENDING
    started_at: float | None = None
    finished_at: float | None = None
    nodes: list = field(default_factory=list)
    cost: float = 0.0
    log_dir: str | None = None
    metrics: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def end_time(self):
        return self.started_at + self.spec.duration_s

    def to_dict(self):
        return {
            "id": self.id, "spec": job_to_dict(self.spec), "submitted_at": self.submitted_at,
            "state": self.state.value, "started_at": self.started_at,
            "finished_at": self.finished_at, "nodes": self.nodes, "cost": self.cost,
            "log_dir": self.log_dir, "metrics": self.metrics, "error": self.error,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["spec"] = parse_batch_job(json.dumps(d["spec"]))
        d["state"] = JobState(d["state"])
        return cls(**d)


def emulation_runner(catalogue: Catalogue, block_size=DEFAULT_BLOCK_SIZE):
    """Runner that executes the job in the channel emulator.

    Recognised ``params``: ``block_size``, ``tuning_hz``, ``retune`` and one
    options object per role (e.g. ``{"probe_rx": {"period_ms": 500}}``).
    """
    def run(record: ExperimentRecord, workdir: Path):
        spec = record.spec
        rf = catalogue.load_rf(spec.rf_scenario_id)
        traffic = catalogue.load_traffic(spec.traffic_scenario_id) if spec.traffic_scenario_id else None
        p = spec.params
        opts = {r: p[r] for r in ("probe_tx", "probe_rx", "modem_endpoint", "silent") if r in p}
        exp = Experiment(record.id, rf, [n.role for n in spec.nodes], workdir, traffic=traffic,
                         seed=spec.seed, block_size=int(p.get("block_size", block_size)),
                         node_opts=opts, tuning_hz=p.get("tuning_hz"),
                         retune=[tuple(x) for x in p.get("retune", ())])
        exp.run(spec.duration_s)
        return exp.finish().to_dict()
    return run


def null_runner(record, workdir):
    """Runner for scheduling simulations: leaves only the job description."""
    (Path(workdir) / "job.json").write_text(json.dumps(job_to_dict(record.spec), sort_keys=True))
    return {}


class BatchScheduler:
    """FIFO queue; the head job blocks everything behind it (no backfill).

    A job starts when its node demand fits the free pool. Its cost,
    ``rate * n_nodes * duration_h``, is charged at start; a head job whose
    team can no longer pay is failed rather than left to block the queue.
    The runner executes at start; archiving happens when the job's
    emulated duration has elapsed on the scheduler clock.
    """

    def __init__(self, resources: ResourceManager, catalogue: Catalogue, work_root, archive_root,
                 runner=None):
        self.resources = resources
        self.catalogue = catalogue
        self.work_root = Path(work_root)
        self.archive_root = Path(archive_root)
        self.runner = runner if runner is not None else emulation_runner(catalogue)
        self.records = {}
        self.queue = []
        self._counter = 0

    def job_cost(self, spec):
        return self.resources.cost(spec.n_nodes, spec.duration_s / 3600.0)

    def submit_job(self, spec: BatchJobSpec, now) -> str:
        if not self.catalogue.has_rf(spec.rf_scenario_id):
            raise UnknownScenarioError(f"unknown rf scenario {spec.rf_scenario_id!r}")
        if spec.traffic_scenario_id and not self.catalogue.has_traffic(spec.traffic_scenario_id):
            raise UnknownScenarioError(f"unknown traffic scenario {spec.traffic_scenario_id!r}")
        spec.check_against(self.catalogue.load_rf(spec.rf_scenario_id))
        if spec.n_nodes > self.resources.pool.size:
            raise InsufficientNodesError(
                f"job needs {spec.n_nodes} nodes, pool has {self.resources.pool.size}")
        self.resources.ledger.weekly_reset(now)
        cost = self.job_cost(spec)
        if not self.resources.ledger.can_afford(spec.team, cost):
            raise InsufficientTokensError(
                f"team {spec.team!r} has {self.resources.ledger.balance(spec.team):g} tokens, "
                f"job costs {cost:g}")
        self._counter += 1
        rec = ExperimentRecord(f"job{self._counter:05d}", spec, float(now))
        self.records[rec.id] = rec
        self.queue.append(rec.id)
        return rec.id

    def _finish(self, rec, now):
        self.resources.pool.release(rec.nodes)
        rec.finished_at = float(now)
        try:
            collect_logs(rec.log_dir, self.archive_root, rec.id)
            rec.log_dir = str(self.archive_root / rec.id)
            rec.state = JobState.ARCHIVED
        except ArchiveError as exc:
            rec.state = JobState.FAILED
            rec.error = str(exc)

    def _start(self, rec, now):
        spec = rec.spec
        self.resources.ledger.charge(spec.team, self.job_cost(spec))
        rec.cost = self.job_cost(spec)
        rec.nodes = self.resources.pool.allocate(spec.n_nodes)
        rec.started_at = float(now)
        rec.state = JobState.RUNNING
        workdir = self.work_root / rec.id
        workdir.mkdir(parents=True, exist_ok=True)
        rec.log_dir = str(workdir)
        try:
            rec.metrics = self.runner(rec, workdir) or {}
        except Exception as exc:  # runtime failure: keep the logs where they are
            self.resources.pool.release(rec.nodes)
            rec.state = JobState.FAILED
            rec.finished_at = float(now)
            rec.error = f"{type(exc).__name__}: {exc}"

    def scheduler_tick(self, now):
        """Finish due jobs (freeing nodes), then start jobs from the head."""
        self.resources.tick(now)
        finished, started = [], []
        for rec in self.running():
            if rec.end_time <= now:
                self._finish(rec, now)
                finished.append(rec.id)
        while self.queue:
            rec = self.records[self.queue[0]]
            if rec.spec.n_nodes > self.resources.pool.free:
                break
            self.queue.pop(0)
            if not self.resources.ledger.can_afford(rec.spec.team, self.job_cost(rec.spec)):
                rec.state = JobState.FAILED
                rec.error = "insufficient tokens at start"
                continue
            self._start(rec, now)
            started.append(rec.id)
        return started, finished

    def running(self):
        return [r for r in self.records.values() if r.state is JobState.RUNNING]

    def next_event_time(self):
        ends = [r.end_time for r in self.running()]
        ends += [r.end for r in self.resources.active()]
        return min(ends) if ends else math.inf

    def drain(self, now):
        """Tick at successive job end times until nothing is queued or running."""
        order = []
        while True:
            started, _ = self.scheduler_tick(now)
            order.extend((now, j) for j in started)
            nxt = self.next_event_time()
            if nxt == math.inf:
                return order, now
            now = nxt
