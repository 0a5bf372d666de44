"""Map-query tools exposed to the LLM via function calling.

Every executor method returns a JSON-serializable payload and never raises:
malformed arguments come back as an ``{"error": ...}`` payload the model can
read and recover from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..geometry import box_box_distance, point_box_distance
from ..localization import localize_tag
from ..params import LocalizationParams
from ..store import TagMap, normalize_tag

TOOL_NAMES = ("localize_tag", "region_region_dist", "point_region_dist", "set_goal")

TOOL_SCHEMAS: list[dict] = [
    {
        "type": "function",
        "function": {
            "name": "localize_tag",
            "description": "Returns the localized regions (axis-aligned boxes) for a tag "
                           "along with their confidence levels.",
            "parameters": {
                "type": "object",
                "properties": {"tag": {"type": "string", "description": "one tag from the tag list"}},
                "required": ["tag"],
            },
        },
    },
    {
        "type": "function",
        "function": {
            "name": "region_region_dist",
            "description": "Computes the distance in meters between regions r1 and r2.",
            "parameters": {
                "type": "object",
                "properties": {
                    "r1": {"$ref": "#/definitions/region"},
                    "r2": {"$ref": "#/definitions/region"},
                },
                "required": ["r1", "r2"],
                "definitions": {
                    "region": {
                        "type": "object",
                        "properties": {
                            "aabb_min": {"type": "array", "items": {"type": "number"}},
                            "aabb_max": {"type": "array", "items": {"type": "number"}},
                        },
                        "required": ["aabb_min", "aabb_max"],
                    }
                },
            },
        },
    },
    {
        "type": "function",
        "function": {
            "name": "point_region_dist",
            "description": "Computes the distance in meters to reach region r from point p.",
            "parameters": {
                "type": "object",
                "properties": {
                    "p": {"type": "array", "items": {"type": "number"}},
                    "r": {
                        "type": "object",
                        "properties": {
                            "aabb_min": {"type": "array", "items": {"type": "number"}},
                            "aabb_max": {"type": "array", "items": {"type": "number"}},
                        },
                        "required": ["aabb_min", "aabb_max"],
                    },
                },
                "required": ["p", "r"],
            },
        },
    },
    {
        "type": "function",
        "function": {
            "name": "set_goal",
            "description": "Designate one localized proposal of a tag as the navigation goal.",
            "parameters": {
                "type": "object",
                "properties": {
                    "tag": {"type": "string"},
                    "proposal_index": {"type": "integer", "minimum": 0, "default": 0},
                },
                "required": ["tag"],
            },
        },
    },
]


def _parse_box(value) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(value, dict):
        raise ValueError(f"region must be an object with aabb_min/aabb_max, got {type(value).__name__}")
    try:
        lo = np.asarray(value["aabb_min"], dtype=float).reshape(3)
        hi = np.asarray(value["aabb_max"], dtype=float).reshape(3)
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"malformed region: {e}") from e
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))) or np.any(lo > hi):
        raise ValueError("malformed region: needs finite aabb_min <= aabb_max")
    return lo, hi


@dataclass
class ToolExecutor:
    """Executes tool calls against a loaded map; pure reads except set_goal,
    whose designated goal is returned to the caller for session bookkeeping.

    Distances are Euclidean box distances by default. When a grid graph (and
    its mesh) is supplied with ``distance_mode="graph"``, the two distance
    tools report shortest-path lengths over the graph instead.
    """

    tag_map: TagMap
    params: LocalizationParams = field(default_factory=LocalizationParams)
    graph: Any = None  # evaluation.GridGraph, optional
    mesh: Any = None  # evaluation.SceneMesh, required for graph mode
    distance_mode: str = "euclidean"  # "euclidean" | "graph"

    def __post_init__(self):
        if self.distance_mode not in ("euclidean", "graph"):
            raise ValueError(f"unknown distance mode {self.distance_mode!r}")
        if self.distance_mode == "graph" and (self.graph is None or self.mesh is None):
            raise ValueError("graph distance mode needs both a grid graph and a mesh")

    def execute(self, name: str, arguments: Any) -> tuple[dict, dict | None]:
        """Returns (payload, goal); goal is set only by a successful set_goal."""
        handler = {
            "localize_tag": self._localize_tag,
            "region_region_dist": self._region_region_dist,
            "point_region_dist": self._point_region_dist,
            "set_goal": self._set_goal,
        }.get(name)
        if handler is None:
            return {"error": f"unknown tool {name!r}; available: {', '.join(TOOL_NAMES)}"}, None
        if not isinstance(arguments, dict):
            return {"error": f"tool arguments must be an object, got {type(arguments).__name__}"}, None
        try:
            return handler(**arguments)
        except TypeError as e:
            return {"error": f"bad arguments for {name}: {e}"}, None
        except ValueError as e:
            return {"error": str(e)}, None

    # ------------------------------------------------------------------ tools

    def _proposals(self, tag: str) -> list[dict]:
        props = localize_tag(self.tag_map, tag, self.params)
        return [p.to_dict() for p in props]

    def _localize_tag(self, tag) -> tuple[dict, None]:
        if not isinstance(tag, str):
            return {"error": "tag must be a string"}, None
        key = normalize_tag(tag)
        payload: dict = {"tag": key, "proposals": self._proposals(key)}
        if key not in self.tag_map:
            payload["note"] = "tag not present in the map; no proposals"
        elif not payload["proposals"]:
            payload["note"] = "tag present but produced no localization proposals"
        return payload, None

    def _region_nodes(self, lo, hi) -> np.ndarray:
        from ..evaluation.assign import assign_nodes_proposal

        return assign_nodes_proposal(self.graph, lo, hi, self.mesh)

    def _graph_distance(self, source_nodes, target_nodes) -> dict:
        if len(source_nodes) == 0 or len(target_nodes) == 0:
            return {"error": "no grid nodes can be assigned to a region"}
        dist = float(self.graph.min_dist_from(source_nodes)[target_nodes].min())
        if not np.isfinite(dist):
            return {"distance": None, "note": "regions are not connected in the grid graph"}
        return {"distance": dist, "mode": "graph"}

    def _region_region_dist(self, r1, r2) -> tuple[dict, None]:
        lo1, hi1 = _parse_box(r1)
        lo2, hi2 = _parse_box(r2)
        if self.distance_mode == "graph":
            return self._graph_distance(self._region_nodes(lo1, hi1),
                                        self._region_nodes(lo2, hi2)), None
        return {"distance": box_box_distance(lo1, hi1, lo2, hi2)}, None

    def _point_region_dist(self, p, r) -> tuple[dict, None]:
        try:
            point = np.asarray(p, dtype=float).reshape(3)
        except (TypeError, ValueError) as e:
            return {"error": f"malformed point: {e}"}, None
        if not np.all(np.isfinite(point)):
            return {"error": "malformed point: coordinates must be finite"}, None
        lo, hi = _parse_box(r)
        if self.distance_mode == "graph":
            # snap the point to its nearest grid node
            start = int(np.argmin(np.linalg.norm(self.graph.nodes - point, axis=1)))
            return self._graph_distance(np.array([start]), self._region_nodes(lo, hi)), None
        return {"distance": point_box_distance(point, lo, hi)}, None

    def _set_goal(self, tag, proposal_index=0) -> tuple[dict, dict | None]:
        if not isinstance(tag, str):
            return {"error": "tag must be a string"}, None
        try:
            index = int(proposal_index)
        except (TypeError, ValueError):
            return {"error": f"proposal_index must be an integer, got {proposal_index!r}"}, None
        key = normalize_tag(tag)
        proposals = self._proposals(key)
        if not proposals:
            return {"error": f"no proposals for tag {key!r}; goal not set"}, None
        if not 0 <= index < len(proposals):
            return {"error": f"proposal_index {index} out of range (0..{len(proposals) - 1})"}, None
        goal = {"tag": key, "proposal_index": index, **proposals[index]}
        return {"ok": True, "goal": goal}, goal
