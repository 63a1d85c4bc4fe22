"""Node trajectories, terrain bounds and the ``.geo.json`` format."""

import json
from dataclasses import dataclass

import numpy as np

from ..scenario.rfscn import check_fields, get_int, get_real, load_json
from .propagation import CompileError


@dataclass(frozen=True)
class Waypoint:
    t_ms: int
    x: float
    y: float
    z: float = 0.0


@dataclass(frozen=True)
class TerrainBounds:
    width_m: float
    height_m: float

    def __post_init__(self):
        if not (self.width_m > 0 and self.height_m > 0):
            raise CompileError("terrain width and height must be > 0")

    def contains(self, x, y):
        return 0 <= x <= self.width_m and 0 <= y <= self.height_m


@dataclass(frozen=True)
class NodeTrajectory:
    """Piecewise-linear path; a single waypoint means a static node."""

    node_id: int
    waypoints: tuple

    def __post_init__(self):
        wps = tuple(self.waypoints)
        object.__setattr__(self, "waypoints", wps)
        if not wps:
            raise CompileError(f"node {self.node_id}: needs at least one waypoint")
        ts = [w.t_ms for w in wps]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise CompileError(f"node {self.node_id}: waypoint times must increase")

    @property
    def static(self):
        return len(self.waypoints) == 1

    def _cached(self):
        if self.__dict__.get("_arr") is None:
            a = np.array([[w.t_ms, w.x, w.y, w.z] for w in self.waypoints], dtype=float)
            object.__setattr__(self, "_arr", a)
        return self.__dict__["_arr"]

    def position(self, t_ms):
        a = self._cached()
        if self.static:
            return a[0, 1:].copy()
        return np.array([np.interp(t_ms, a[:, 0], a[:, c]) for c in (1, 2, 3)])

    def check_span(self, duration_ms):
        if self.static:
            return
        if self.waypoints[0].t_ms > 0 or self.waypoints[-1].t_ms < duration_ms:
            raise CompileError(
                f"node {self.node_id}: trajectory covers [{self.waypoints[0].t_ms}, "
                f"{self.waypoints[-1].t_ms}] ms, scenario needs [0, {duration_ms}]")

    def check_bounds(self, terrain: TerrainBounds):
        for w in self.waypoints:
            if not terrain.contains(w.x, w.y):
                raise CompileError(
                    f"node {self.node_id}: waypoint ({w.x}, {w.y}) at t={w.t_ms} ms is outside "
                    f"the {terrain.width_m} x {terrain.height_m} m terrain")


def positions_at(trajectories, t_ms):
    return np.stack([tr.position(t_ms) for tr in trajectories])


def static_node(node_id, x, y, z=0.0):
    return NodeTrajectory(node_id, (Waypoint(0, x, y, z),))


def parse_geometry(data):
    """``{terrain:{w,h}, nodes:[{id, waypoints:[{t_ms,x,y,z}]}]}`` -> (terrain, trajectories)."""
    doc = load_json(data)
    check_fields(doc, "", {"terrain", "nodes"}, {"terrain", "nodes"})
    check_fields(doc["terrain"], "terrain", {"w", "h"}, {"w", "h"})
    terrain = TerrainBounds(get_real(doc["terrain"], "w", "terrain.w"),
                            get_real(doc["terrain"], "h", "terrain.h"))
    trajectories = []
    for i, nd in enumerate(doc["nodes"]):
        p = f"nodes[{i}]"
        check_fields(nd, p, {"id", "waypoints"}, {"id", "waypoints"})
        wps = []
        for j, w in enumerate(nd["waypoints"]):
            wp = f"{p}.waypoints[{j}]"
            check_fields(w, wp, {"t_ms", "x", "y", "z"}, {"t_ms", "x", "y"})
            wps.append(Waypoint(get_int(w, "t_ms", f"{wp}.t_ms"), get_real(w, "x", f"{wp}.x"),
                                get_real(w, "y", f"{wp}.y"),
                                get_real(w, "z", f"{wp}.z") if "z" in w else 0.0))
        trajectories.append(NodeTrajectory(get_int(nd, "id", f"{p}.id"), tuple(wps)))
    trajectories.sort(key=lambda tr: tr.node_id)
    return terrain, trajectories


def serialize_geometry(terrain, trajectories):
    doc = {
        "terrain": {"w": terrain.width_m, "h": terrain.height_m},
        "nodes": [
            {"id": tr.node_id,
             "waypoints": [{"t_ms": w.t_ms, "x": w.x, "y": w.y, "z": w.z} for w in tr.waypoints]}
            for tr in trajectories
        ],
    }
    return (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode("utf-8")
