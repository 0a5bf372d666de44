"""Assign grid-graph nodes to proposals and labeled entities.

Three rules: proposals inflate only when empty, labeled objects always gain a
collision-checked ring (1 m by default, the object-goal success radius), and
labeled regions never inflate.
"""

from __future__ import annotations

import numpy as np

from ..geometry import as_box, clamp_to_box
from .gridgraph import GridGraph
from .mesh import SceneMesh, segment_hits_mesh


def _ring_nodes(graph: GridGraph, bmin, bmax, delta: float, exclude: np.ndarray,
                mesh: SceneMesh) -> list[int]:
    """Nodes in the delta-inflated box (minus ``exclude``) with a clear line
    to their nearest point on the original box."""
    inflated = graph.nodes_in_box(bmin - delta, bmax + delta)
    candidates = np.setdiff1d(inflated, exclude, assume_unique=False)
    kept = []
    for n in candidates:
        target = clamp_to_box(graph.nodes[n], bmin, bmax)
        if not segment_hits_mesh(mesh, graph.nodes[n], target):
            kept.append(int(n))
    return kept


def assign_nodes_proposal(graph: GridGraph, bmin, bmax, mesh: SceneMesh,
                          delta: float | None = None) -> np.ndarray:
    """Nodes inside the proposal box; when none, collision-free nodes of the
    delta-inflated box (delta defaults to the grid resolution)."""
    bmin, bmax = as_box(bmin, bmax)
    if delta is None:
        delta = graph.resolution
    inside = graph.nodes_in_box(bmin, bmax)
    if inside.size:
        return inside
    return np.asarray(sorted(_ring_nodes(graph, bmin, bmax, delta, inside, mesh)), dtype=int)


def assign_nodes_object(graph: GridGraph, bmin, bmax, mesh: SceneMesh,
                        delta: float = 1.0) -> np.ndarray:
    """Nodes inside the object box plus the collision-checked inflated ring
    (inflation always applied)."""
    bmin, bmax = as_box(bmin, bmax)
    inside = graph.nodes_in_box(bmin, bmax)
    ring = _ring_nodes(graph, bmin, bmax, delta, inside, mesh)
    return np.asarray(sorted(set(inside.tolist()) | set(ring)), dtype=int)


def assign_nodes_region(graph: GridGraph, bmin, bmax) -> np.ndarray:
    """Exactly the nodes inside the region box; no inflation."""
    bmin, bmax = as_box(bmin, bmax)
    return graph.nodes_in_box(bmin, bmax)
