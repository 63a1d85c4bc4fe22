"""Relay selection on top of the emulator: SINR measurement and matching."""

from .matching import assignment_weight, max_weight_matching, random_assignment
from .relay import (
    RelayReport,
    SinrMatrix,
    engine_at,
    measure_sinr_matrix,
    run_relay_experiment,
    split_squad,
)
