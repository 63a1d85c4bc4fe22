"""Scenario data model, interchange formats and the scenario catalogue."""

from .catalogue import Catalogue, catalogue_info, catalogue_list
from .errors import (
    FormatSyntaxError,
    InvariantError,
    MissingFieldError,
    ScenarioError,
    UnknownFieldError,
    UnknownScenarioError,
)
from .jobs import parse_batch_job, serialize_batch_job
from .model import (
    NODE_ROLES,
    BatchJobSpec,
    FlowEvent,
    FlowKind,
    NodeSpec,
    Pattern,
    RfScenario,
    TapUpdate,
    TrafficScenario,
    validate_rf_scenario,
    validate_traffic,
)
from .rfscn import parse_rf_scenario, read_rf_scenario, serialize_rf_scenario, write_rf_scenario
from .tgen import parse_traffic_script, read_traffic_script, serialize_traffic_script
