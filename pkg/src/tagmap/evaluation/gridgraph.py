"""Collision-free 3D grid graph over a scene mesh for approximate shortest paths."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from ..geometry import box_contains_points
from .mesh import SceneMesh, segment_hits_mesh


class GridGraphError(RuntimeError):
    pass


def inside_scene(points, mesh: SceneMesh, k_neighbors: int = 30,
                 mean_dist_threshold: float = 2.0, dot_threshold: float = 0.0):
    """Whether point(s) lie inside the scene's free volume.

    A point is outside when the mean distance to its k nearest mesh vertices
    exceeds ``mean_dist_threshold``, or when the mean over those vertices of
    dot(unit vertex-to-point direction, vertex normal) exceeds
    ``dot_threshold`` (scene normals point out of the free volume).
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if len(mesh.vertices) == 0:
        raise ValueError("mesh has no vertices")
    k = min(k_neighbors, len(mesh.vertices))
    dist, idx = mesh.kdtree.query(pts, k=k)
    if k == 1:
        dist, idx = dist[:, None], idx[:, None]
    near_enough = dist.mean(axis=1) <= mean_dist_threshold

    dirs = pts[:, None, :] - mesh.vertices[idx]
    lengths = np.linalg.norm(dirs, axis=2, keepdims=True)
    with np.errstate(invalid="ignore"):
        dirs = np.where(lengths > 1e-12, dirs / lengths, 0.0)
    mean_dot = np.einsum("nkd,nkd->nk", dirs, mesh.normals[idx]).mean(axis=1)
    inside = near_enough & ~(mean_dot > dot_threshold)
    return bool(inside[0]) if single else inside


@dataclass
class GridGraph:
    """Lattice nodes inside the scene, joined by collision-free axis edges."""

    nodes: np.ndarray  # (N, 3) meters
    edges: np.ndarray  # (E, 2) node indices, a < b
    resolution: float
    _csr: csr_matrix | None = field(default=None, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def csgraph(self) -> csr_matrix:
        if self._csr is None:
            n = len(self.nodes)
            if len(self.edges):
                a, b = self.edges[:, 0], self.edges[:, 1]
                w = np.linalg.norm(self.nodes[a] - self.nodes[b], axis=1)
                self._csr = csr_matrix(
                    (np.concatenate([w, w]), (np.concatenate([a, b]), np.concatenate([b, a]))),
                    shape=(n, n),
                )
            else:
                self._csr = csr_matrix((n, n))
        return self._csr

    def min_dist_from(self, sources) -> np.ndarray:
        """Shortest-path distance from the nearest of ``sources`` to every node."""
        src = np.unique(np.asarray(sources, dtype=int))
        if src.size == 0:
            return np.full(len(self.nodes), np.inf)
        return dijkstra(self.csgraph(), directed=False, indices=src, min_only=True)

    def nodes_in_box(self, bmin, bmax) -> np.ndarray:
        return np.flatnonzero(box_contains_points(bmin, bmax, self.nodes))


def lattice_axes(lo: np.ndarray, hi: np.ndarray, resolution: float) -> list[np.ndarray]:
    """Per-axis lattice coordinates strictly between the bounds.

    The open lattice keeps nodes off the bounding surfaces; a resolution
    larger than the scene extent yields an empty axis.
    """
    axes = []
    for a in range(3):
        n = int(np.floor((hi[a] - lo[a]) / resolution - 1e-9))
        axes.append(lo[a] + resolution * np.arange(1, n + 1))
    return axes


def build_grid_graph(mesh: SceneMesh, resolution: float = 0.5, k_neighbors: int = 30,
                     mean_dist_threshold: float = 2.0, dot_threshold: float = 0.0) -> GridGraph:
    """Lattice nodes spanning the mesh bounds filtered by the inside-scene
    test, with edges between 6-adjacent neighbors that pass a collision-free
    segment test against the mesh."""
    lo, hi = mesh.bounds()
    axes = lattice_axes(lo, hi, resolution)
    shape = tuple(len(ax) for ax in axes)
    if 0 in shape:
        raise GridGraphError(f"scene too small for resolution {resolution} m")
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    keep = inside_scene(pts, mesh, k_neighbors, mean_dist_threshold, dot_threshold)
    if not keep.any():
        raise GridGraphError(f"scene too small for resolution {resolution} m: no nodes survive")

    node_of = np.full(shape, -1, dtype=int)
    node_of.reshape(-1)[keep] = np.arange(int(keep.sum()))
    nodes = pts[keep]

    edges = []
    for axis in range(3):
        sl_a = [slice(None)] * 3
        sl_b = [slice(None)] * 3
        sl_a[axis] = slice(None, -1)
        sl_b[axis] = slice(1, None)
        a_ids = node_of[tuple(sl_a)].reshape(-1)
        b_ids = node_of[tuple(sl_b)].reshape(-1)
        for a, b in zip(a_ids, b_ids):
            if a < 0 or b < 0:
                continue
            if not segment_hits_mesh(mesh, nodes[a], nodes[b]):
                edges.append((min(a, b), max(a, b)))
    edges = np.asarray(sorted(edges), dtype=int).reshape(-1, 2)
    return GridGraph(nodes=nodes, edges=edges, resolution=float(resolution))
