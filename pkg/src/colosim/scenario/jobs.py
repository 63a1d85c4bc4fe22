"""Batch job documents (``.job.json``)."""

import json

from .errors import InvariantError
from .model import NODE_ROLES, BatchJobSpec, NodeSpec
from .rfscn import check_fields, get_int, get_real, get_str, load_json

_FIELDS = {"duration_s", "rf_scenario", "traffic_scenario", "n_nodes", "nodes", "params", "team", "seed"}
_REQUIRED = {"duration_s", "rf_scenario", "n_nodes", "nodes", "team"}


def parse_batch_job(data) -> BatchJobSpec:
    """Validate a job document. Scenario ids are resolved later, at submit time."""
    doc = load_json(data)
    check_fields(doc, "", _FIELDS, _REQUIRED)
    duration = get_real(doc, "duration_s", "duration_s")
    if not duration > 0 or duration == float("inf"):
        raise InvariantError("must be a positive finite number", "duration_s")
    n_nodes = get_int(doc, "n_nodes", "n_nodes")
    if n_nodes < 1:
        raise InvariantError("must be ≥ 1", "n_nodes")
    if not isinstance(doc["nodes"], list):
        raise InvariantError("expected a list", "nodes")
    if len(doc["nodes"]) != n_nodes:
        raise InvariantError(f"{len(doc['nodes'])} node entries for n_nodes={n_nodes}", "nodes")
    nodes = []
    for i, nd in enumerate(doc["nodes"]):
        p = f"nodes[{i}]"
        check_fields(nd, p, {"role", "command"}, {"role"})
        role = get_str(nd, "role", f"{p}.role")
        if role not in NODE_ROLES:
            raise InvariantError(f"unknown role {role!r}; known: {', '.join(NODE_ROLES)}", f"{p}.role")
        command = get_str(nd, "command", f"{p}.command") if "command" in nd else ""
        nodes.append(NodeSpec(role, command))
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise InvariantError("expected an object", "params")
    traffic = get_str(doc, "traffic_scenario", "traffic_scenario") if "traffic_scenario" in doc else None
    seed = get_int(doc, "seed", "seed") if "seed" in doc else 0
    if not 0 <= seed < 2**64:
        raise InvariantError("must be an unsigned 64-bit integer", "seed")
    return BatchJobSpec(
        duration_s=duration,
        rf_scenario_id=get_str(doc, "rf_scenario", "rf_scenario"),
        n_nodes=n_nodes,
        nodes=tuple(nodes),
        team=get_str(doc, "team", "team"),
        traffic_scenario_id=traffic,
        params=params,
        seed=seed,
    )


def job_to_dict(spec: BatchJobSpec):
    d = {
        "duration_s": spec.duration_s,
        "rf_scenario": spec.rf_scenario_id,
        "n_nodes": spec.n_nodes,
        "nodes": [{"role": n.role, "command": n.command} for n in spec.nodes],
        "params": spec.params,
        "team": spec.team,
        "seed": spec.seed,
    }
    if spec.traffic_scenario_id is not None:
        d["traffic_scenario"] = spec.traffic_scenario_id
    return d


def serialize_batch_job(spec: BatchJobSpec) -> bytes:
    return (json.dumps(job_to_dict(spec), sort_keys=True, indent=1) + "\n").encode("utf-8")
