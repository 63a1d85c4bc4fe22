"""Geometry and channel-model parameters to RF scenario tap timelines."""

from .compile import DEFAULT_UPDATE_PERIOD_MS, compile_scenario, link_id
from .families import (
    DISTANCE_CLASSES,
    SPEED_CLASSES,
    GeneratedScenario,
    gen_alleys,
    gen_cellular,
    gen_sce_qualification,
)
from .geometry import (
    NodeTrajectory,
    TerrainBounds,
    Waypoint,
    parse_geometry,
    positions_at,
    serialize_geometry,
    static_node,
)
from .propagation import (
    FSPL,
    LOG_DISTANCE,
    ChannelModelParams,
    CompileError,
    delay_to_tap,
    fading_factors,
    fading_taps,
    pathloss_db,
    pathloss_gain,
    snr_to_gain,
)

compile = compile_scenario
