"""Reservations, token accounting, the batch queue and experiment lifecycle."""

from .archive import ArchiveError, build_manifest, collect_logs, read_manifest, verify_archive
from .experiment import DEFAULT_BLOCK_SIZE, Experiment, ExperimentResult, TrafficHub, run_experiment
from .ledger import (
    DEFAULT_RATE,
    WEEK_S,
    InsufficientTokensError,
    ResourceError,
    TeamAccount,
    TokenLedger,
    UnknownTeamError,
    weekly_reset,
)
from .playback import Playback, playback, update_boundary, update_sample
from .resources import InsufficientNodesError, NodePool, Reservation, ResourceManager, ResState
from .scheduler import (
    BatchScheduler,
    ExperimentRecord,
    JobState,
    emulation_runner,
    null_runner,
)
from .state import DEFAULT_POOL_SIZE, StateDir


def reserve(manager: ResourceManager, team, n_nodes, duration_h, now=0.0) -> Reservation:
    return manager.reserve(team, n_nodes, duration_h, now)
