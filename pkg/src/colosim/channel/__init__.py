"""Channel engine: per-pair sparse FIR filtering and interference mixing."""

from .engine import (
    MAX_CHANNELS,
    SPEED_OF_LIGHT,
    ChannelError,
    CirTaps,
    Engine,
    EngineConfig,
    NodeTuning,
    SampleBlock,
    create_engine,
    max_emulable_delay,
)
from .kernels import HISTORY, MAX_NONZERO_TAPS, N_TAP_SLOTS

__all__ = [
    "ChannelError", "CirTaps", "Engine", "EngineConfig", "NodeTuning", "SampleBlock",
    "create_engine", "max_emulable_delay", "MAX_CHANNELS", "SPEED_OF_LIGHT",
    "HISTORY", "MAX_NONZERO_TAPS", "N_TAP_SLOTS",
]
