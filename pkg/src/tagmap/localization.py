"""Coarse 3D localization of a tag by multi-view frustum voting.

Pipeline: the tag's viewpoints are mapped to camera frustums (near plane
0.2 m, far plane = the stored 80th-percentile depth), the space covered by
their AABBs is voxelized, each voxel center is voted by the frustums that
contain it, voxels are thresholded at a series of normalized vote levels,
each level is clustered with DBSCAN, every cluster becomes an axis-aligned
box proposal carrying a viewpoint-count confidence level, and a final
non-maximum suppression removes proposals that fully contain a
higher-confidence proposal.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import box_contains_box, box_volume
from .params import LocalizationParams
from .store import TagMap, Viewpoint


class FrustumError(ValueError):
    """Raised when a viewpoint cannot produce a valid frustum."""


class Frustum:
    """Six inward-oriented half-space planes of a pinhole camera volume.

    A point is inside iff ``n . p + d >= 0`` for all six planes. Planes are
    derived so that the test is equivalent to projecting the point through
    the intrinsics and checking 0 <= u <= width, 0 <= v <= height, and
    near <= depth <= far (all bounds inclusive).
    """

    def __init__(self, planes: np.ndarray, aabb_min: np.ndarray, aabb_max: np.ndarray,
                 near: float, far: float):
        self.planes = planes  # (6, 4): nx, ny, nz, d
        self.aabb_min = aabb_min
        self.aabb_max = aabb_max
        self.near = near
        self.far = far

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        signed = pts @ self.planes[:, :3].T + self.planes[:, 3]
        return np.all(signed >= 0.0, axis=1)


def make_frustum(viewpoint: Viewpoint, near: float = LocalizationParams().near_plane) -> Frustum:
    """Build the viewing frustum of a viewpoint with the stored far plane."""
    far = viewpoint.far_plane_dist
    if far <= near:
        raise FrustumError(
            f"viewpoint {viewpoint.id}: far plane {far} must exceed near plane {near}"
        )
    intr = viewpoint.intrinsics
    fx, fy, cx, cy = intr.fx, intr.fy, intr.cx, intr.cy
    w, h = float(intr.width), float(intr.height)

    # Camera-frame planes; all assume z > 0 which the near plane enforces.
    planes_cam = np.array(
        [
            [0.0, 0.0, 1.0, -near],    # z >= near
            [0.0, 0.0, -1.0, far],     # z <= far
            [fx, 0.0, cx, 0.0],        # u >= 0
            [-fx, 0.0, w - cx, 0.0],   # u <= width
            [0.0, fy, cy, 0.0],        # v >= 0
            [0.0, -fy, h - cy, 0.0],   # v <= height
        ]
    )
    rot = viewpoint.pose[:3, :3]
    t = viewpoint.pose[:3, 3]
    normals = planes_cam[:, :3] @ rot.T
    offsets = planes_cam[:, 3] - normals @ t
    planes = np.hstack([normals, offsets[:, None]])

    # AABB from the eight frustum corners.
    us = np.array([0.0, w, 0.0, w])
    vs = np.array([0.0, 0.0, h, h])
    dirs = np.stack([(us - cx) / fx, (vs - cy) / fy, np.ones(4)], axis=1)
    corners_cam = np.vstack([dirs * near, dirs * far])
    corners = corners_cam @ rot.T + t
    return Frustum(planes, corners.min(axis=0), corners.max(axis=0), near, far)


@dataclass
class VoxelGrid:
    """Vote counts on a regular grid tightly bounding the frustum AABBs."""

    origin: np.ndarray  # (3,) meters, minimum corner
    voxel_size: float
    dims: tuple[int, int, int]
    votes: np.ndarray  # (nx, ny, nz) int32

    def center(self, ijk) -> np.ndarray:
        return self.origin + (np.asarray(ijk, dtype=float) + 0.5) * self.voxel_size

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.origin[axis] + (np.arange(self.dims[axis]) + 0.5) * self.voxel_size

    def nonzero_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Centers and votes of all voxels with at least one vote."""
        idx = np.argwhere(self.votes > 0)
        centers = self.origin + (idx + 0.5) * self.voxel_size
        return centers, self.votes[tuple(idx.T)]


def vote(frustums: list[Frustum], voxel_size: float) -> VoxelGrid:
    """Count, per voxel, the frustums whose volume contains the voxel center."""
    if not frustums:
        raise ValueError("need at least one frustum")
    lo = np.min([f.aabb_min for f in frustums], axis=0)
    hi = np.max([f.aabb_max for f in frustums], axis=0)
    dims = np.maximum(1, np.ceil((hi - lo) / voxel_size - 1e-9).astype(int))
    grid = VoxelGrid(origin=lo, voxel_size=float(voxel_size), dims=tuple(int(d) for d in dims),
                     votes=np.zeros(tuple(dims), dtype=np.int32))

    axes = [grid.axis_centers(a) for a in range(3)]
    for f in frustums:
        # Restrict the plane tests to the slab of voxels under the frustum AABB.
        i0 = np.clip(np.floor((f.aabb_min - lo) / voxel_size - 0.5).astype(int), 0, dims - 1)
        i1 = np.clip(np.ceil((f.aabb_max - lo) / voxel_size - 0.5).astype(int) + 1, 1, dims)
        xs, ys, zs = (axes[a][i0[a]:i1[a]] for a in range(3))
        if xs.size == 0 or ys.size == 0 or zs.size == 0:
            continue
        pts = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), axis=-1).reshape(-1, 3)
        inside = f.contains(pts).reshape(xs.size, ys.size, zs.size)
        grid.votes[i0[0]:i1[0], i0[1]:i1[1], i0[2]:i1[2]] += inside
    return grid


@dataclass
class Level:
    """One vote-threshold slice of the grid: the voxels with votes >= threshold."""

    threshold: int
    fraction: float  # the normalized threshold that produced this level
    points: np.ndarray  # (N, 3) voxel centers
    votes: np.ndarray  # (N,) votes at those voxels


def extract_levels(grid: VoxelGrid, fractions=LocalizationParams().normalized_vote_thresholds) -> list[Level]:
    """Threshold the grid at each normalized fraction of the maximum vote.

    The integer threshold for fraction t is max(1, ceil(t * v_max)); duplicate
    thresholds are deduplicated, keeping the lowest producing fraction.
    """
    v_max = int(grid.votes.max()) if grid.votes.size else 0
    if v_max == 0:
        return []
    levels: list[Level] = []
    seen: set[int] = set()
    for t in fractions:
        thr = max(1, math.ceil(t * v_max - 1e-9))
        if thr in seen:
            continue
        seen.add(thr)
        idx = np.argwhere(grid.votes >= thr)
        centers = grid.origin + (idx + 0.5) * grid.voxel_size
        levels.append(Level(threshold=thr, fraction=float(t), points=centers,
                            votes=grid.votes[tuple(idx.T)]))
    return levels


def dbscan(points: np.ndarray, eps: float, min_points: int) -> list[np.ndarray]:
    """Density-based clustering; returns clusters as index arrays, noise dropped.

    Semantics are pinned for determinism: neighborhoods are closed balls of
    radius eps and include the point itself; seed points are expanded in
    ascending-index order, so a border point joins the first core cluster
    that reaches it.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if min_points < 1:
        raise ValueError("min_points must be >= 1")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    n = len(pts)
    if n == 0:
        return []
    tree = cKDTree(pts)
    neighborhoods = tree.query_ball_point(pts, eps)

    UNVISITED, NOISE = -2, -1
    labels = np.full(n, UNVISITED, dtype=int)
    clusters: list[list[int]] = []
    for i in range(n):
        if labels[i] != UNVISITED:
            continue
        neigh = neighborhoods[i]
        if len(neigh) < min_points:
            labels[i] = NOISE
            continue
        cid = len(clusters)
        members = [i]
        labels[i] = cid
        queue = deque(sorted(neigh))
        while queue:
            j = queue.popleft()
            if labels[j] == NOISE:
                labels[j] = cid  # border point reached by this core cluster
                members.append(j)
                continue
            if labels[j] != UNVISITED:
                continue
            labels[j] = cid
            members.append(j)
            jn = neighborhoods[j]
            if len(jn) >= min_points:
                queue.extend(sorted(jn))
        clusters.append(sorted(members))
    return [np.array(c, dtype=int) for c in clusters]


@dataclass
class Proposal:
    """An axis-aligned box hypothesizing where a tag's entity lies."""

    aabb_min: np.ndarray
    aabb_max: np.ndarray
    confidence_level: int  # minimum viewpoint count across the cluster
    level_fraction: float  # normalized vote threshold that produced it
    voxel_count: int

    def __post_init__(self):
        self.aabb_min = np.asarray(self.aabb_min, dtype=float)
        self.aabb_max = np.asarray(self.aabb_max, dtype=float)
        if np.any(self.aabb_min > self.aabb_max):
            raise ValueError("proposal box has min > max")
        if self.confidence_level < 1:
            raise ValueError("confidence_level must be >= 1")

    def key(self) -> tuple:
        return (tuple(self.aabb_min), tuple(self.aabb_max), self.confidence_level)

    def to_dict(self, tag: str | None = None) -> dict:
        d = {
            "aabb_min": [float(x) for x in self.aabb_min],
            "aabb_max": [float(x) for x in self.aabb_max],
            "confidence_level": int(self.confidence_level),
            "level_fraction": float(self.level_fraction),
            "voxel_count": int(self.voxel_count),
        }
        if tag is not None:
            d = {"tag": tag, **d}
        return d


CONTAINMENT_EPS = 1e-6  # meters, box-in-box slack for suppression


def nms(proposals: list[Proposal]) -> list[Proposal]:
    """Drop proposals that contain a surviving higher-confidence proposal.

    Exact duplicates (same box and level) are deduplicated first. Proposals
    are processed by descending confidence level, ties by smaller volume, so
    survivors are decided before anything they could suppress.
    """
    unique: dict[tuple, Proposal] = {}
    for p in proposals:
        unique.setdefault(p.key(), p)
    ordered = sorted(
        unique.values(),
        key=lambda p: (-p.confidence_level, box_volume(p.aabb_min, p.aabb_max),
                       tuple(p.aabb_min), tuple(p.aabb_max)),
    )
    kept: list[Proposal] = []
    for p in ordered:
        suppressed = any(
            q.confidence_level > p.confidence_level
            and box_contains_box(p.aabb_min, p.aabb_max, q.aabb_min, q.aabb_max, CONTAINMENT_EPS)
            for q in kept
        )
        if not suppressed:
            kept.append(p)
    return kept


def localize_tag(tag_map: TagMap, tag: str, params: LocalizationParams | None = None,
                 max_views: int | None = None) -> list[Proposal]:
    """Full coarse-localization pipeline for one tag.

    Returns proposals sorted by descending confidence level, then descending
    voxel count; an unknown tag yields an empty list (callers include the
    LLM, which must see "no proposals" rather than an error). ``max_views``
    optionally caps retrieval to the top-K most confident viewpoints; the
    default uses all of them.
    """
    params = params or LocalizationParams()
    views = tag_map.viewpoints_for(tag)
    if max_views is not None:
        views = views[: max(0, int(max_views))]
    if not views:
        return []
    frustums = [make_frustum(vp, params.near_plane) for vp, _ in views]
    grid = vote(frustums, params.voxel_size)
    proposals: list[Proposal] = []
    half = params.voxel_size / 2.0
    for level in extract_levels(grid, params.normalized_vote_thresholds):
        for cluster in dbscan(level.points, params.dbscan_eps, params.dbscan_min_points):
            pts = level.points[cluster]
            proposals.append(
                Proposal(
                    aabb_min=pts.min(axis=0) - half,
                    aabb_max=pts.max(axis=0) + half,
                    confidence_level=int(level.votes[cluster].min()),
                    level_fraction=level.fraction,
                    voxel_count=len(cluster),
                )
            )
    survivors = nms(proposals)
    survivors.sort(key=lambda p: (-p.confidence_level, -p.voxel_count))
    return survivors
