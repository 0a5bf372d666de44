"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (brute force, textbook transcription,
repeated single-source search) and shares no code with the production paths
it checks.
"""

from __future__ import annotations

import heapq
import math

import numpy as np


# ----------------------------------------------------------------- statistics


def percentile_linear(values, q: float) -> float:
    """Sorted-order-statistics percentile with linear interpolation."""
    xs = sorted(float(v) for v in values)
    if not xs:
        raise ValueError("empty input")
    rank = q / 100.0 * (len(xs) - 1)
    lo = math.floor(rank)
    hi = math.ceil(rank)
    if lo == hi:
        return xs[lo]
    frac = rank - lo
    return xs[lo] * (1 - frac) + xs[hi] * frac


# -------------------------------------------------- frustum containment/votes


def projected_inside(viewpoint, near: float, points: np.ndarray) -> np.ndarray:
    """Point-in-frustum by projecting through the intrinsics and checking
    pixel bounds and the [near, far] depth range (all inclusive)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    rot = viewpoint.pose[:3, :3]
    t = viewpoint.pose[:3, 3]
    cam = (pts - t) @ rot  # rows of R^T (p - t)
    z = cam[:, 2]
    intr = viewpoint.intrinsics
    with np.errstate(divide="ignore", invalid="ignore"):
        u = intr.fx * cam[:, 0] / z + intr.cx
        v = intr.fy * cam[:, 1] / z + intr.cy
    ok = (z >= near) & (z <= viewpoint.far_plane_dist)
    ok &= (u >= 0) & (u <= intr.width) & (v >= 0) & (v <= intr.height)
    return ok


def brute_force_votes(viewpoints, near: float, grid) -> np.ndarray:
    """Per-voxel frustum counts via the projection test at every voxel center."""
    idx = np.argwhere(np.ones(grid.dims, dtype=bool))
    centers = grid.origin + (idx + 0.5) * grid.voxel_size
    votes = np.zeros(len(centers), dtype=np.int32)
    for vp in viewpoints:
        votes += projected_inside(vp, near, centers)
    return votes.reshape(grid.dims)


# --------------------------------------------------------------------- DBSCAN


def naive_dbscan(points: np.ndarray, eps: float, min_points: int) -> list[list[int]]:
    """Textbook DBSCAN over a full O(n^2) distance matrix.

    Clusters are the connected components of core points (in ascending order
    of their first core point) plus border points, each border point going to
    the earliest-created cluster that sees it. Noise is dropped.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n == 0:
        return []
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    neigh = [set(np.flatnonzero(dist[i] <= eps)) for i in range(n)]  # includes self
    core = [len(neigh[i]) >= min_points for i in range(n)]

    assigned: dict[int, int] = {}
    clusters: list[list[int]] = []
    for i in range(n):
        if not core[i] or i in assigned:
            continue
        comp: set[int] = set()
        frontier = {i}
        while frontier:
            j = frontier.pop()
            if j in comp:
                continue
            comp.add(j)
            frontier |= {k for k in neigh[j] if core[k] and k not in comp}
        members = set(comp)
        for j in comp:
            members |= {k for k in neigh[j] if not core[k] and k not in assigned}
        cid = len(clusters)
        for m in members:
            assigned[m] = cid
        clusters.append(sorted(members))
    return clusters


def partitions_equal(a: list, b: list) -> bool:
    """Partition equality up to relabeling."""
    return sorted(tuple(sorted(c)) for c in a) == sorted(tuple(sorted(c)) for c in b)


# ------------------------------------------------------------------------ NMS


def _contains(outer, inner, eps=1e-6) -> bool:
    return bool(
        np.all(inner.aabb_min >= outer.aabb_min - eps)
        and np.all(inner.aabb_max <= outer.aabb_max + eps)
    )


def naive_nms(proposals: list) -> list:
    """Stratified fixed point of the suppression rule, computed level by
    level: survivors at the highest confidence level are kept, and a
    lower-level proposal survives iff no surviving higher-level proposal is
    contained in its box. Exact duplicates are removed first."""
    unique = []
    seen = set()
    for p in proposals:
        k = p.key()
        if k not in seen:
            seen.add(k)
            unique.append(p)
    survivors: list = []
    for level in sorted({p.confidence_level for p in unique}, reverse=True):
        for p in [q for q in unique if q.confidence_level == level]:
            if not any(
                q.confidence_level > p.confidence_level and _contains(p, q) for q in survivors
            ):
                survivors.append(p)
    return survivors


# ------------------------------------------------------------- shortest paths


def sssp(n_nodes: int, weighted_edges, source: int) -> np.ndarray:
    """Single-source Dijkstra over an undirected weighted edge list."""
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n_nodes)]
    for a, b, w in weighted_edges:
        adj[a].append((b, w))
        adj[b].append((a, w))
    dist = np.full(n_nodes, np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def p2e_oracle(n_nodes: int, weighted_edges, proposal_nodes, entity_sets) -> float:
    """Mean over proposal nodes of min distance to any entity node, by
    repeated single-source search from each proposal node."""
    entity_nodes = sorted({int(i) for s in entity_sets for i in s})
    p_nodes = sorted({int(i) for i in proposal_nodes})
    total = 0.0
    for p in p_nodes:
        dist = sssp(n_nodes, weighted_edges, p)
        total += min(dist[e] for e in entity_nodes)
    return total / len(p_nodes)


def e2p_oracle(n_nodes: int, weighted_edges, entity_nodes, proposal_sets) -> float:
    return p2e_oracle(n_nodes, weighted_edges, entity_nodes, proposal_sets)


# ------------------------------------------------------------ mesh ray parity


def _ray_hits(origin, direction, v0, v1, v2):
    """(hit, suspicious) for one ray against one triangle, scalar math."""
    e1 = v1 - v0
    e2 = v2 - v0
    pvec = np.cross(direction, e2)
    det = float(np.dot(e1, pvec))
    if abs(det) < 1e-12:
        return False, False
    inv = 1.0 / det
    tvec = origin - v0
    u = float(np.dot(tvec, pvec)) * inv
    qvec = np.cross(tvec, e1)
    v = float(np.dot(direction, qvec)) * inv
    t = float(np.dot(e2, qvec)) * inv
    margin = 1e-7
    hit = (u > 0) and (v > 0) and (u + v < 1) and (t > 0)
    suspicious = (
        abs(u) < margin or abs(v) < margin or abs(1 - (u + v)) < margin or abs(t) < margin
    ) and t > -margin
    return hit, suspicious


def parity_inside(vertices: np.ndarray, triangles: np.ndarray, point, rng) -> bool:
    """Watertight-mesh inside test by ray-crossing parity; retries rays that
    graze edges or vertices."""
    tris = [(vertices[a], vertices[b], vertices[c]) for a, b, c in triangles]
    for _ in range(32):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        crossings = 0
        bad = False
        for v0, v1, v2 in tris:
            hit, suspicious = _ray_hits(np.asarray(point, float), direction, v0, v1, v2)
            if suspicious:
                bad = True
                break
            crossings += hit
        if not bad:
            return crossings % 2 == 1
    raise RuntimeError("could not find a clean ray direction")


# -------------------------------------------------------- box-distance oracle


def _axis_candidates(lo, hi, other_lo, other_hi, n=5):
    cands = {lo, hi, min(max(other_lo, lo), hi), min(max(other_hi, lo), hi)}
    cands.update(np.linspace(lo, hi, n))
    return sorted(cands)


def sampled_box_box_distance(amin, amax, bmin, bmax) -> float:
    """Min pointwise distance over per-axis sample grids that include the
    facing coordinates, so the true minimum is attained."""
    a_axes = [_axis_candidates(amin[i], amax[i], bmin[i], bmax[i]) for i in range(3)]
    b_axes = [_axis_candidates(bmin[i], bmax[i], amin[i], amax[i]) for i in range(3)]
    a_pts = np.array(np.meshgrid(*a_axes, indexing="ij")).reshape(3, -1).T
    b_pts = np.array(np.meshgrid(*b_axes, indexing="ij")).reshape(3, -1).T
    d2 = ((a_pts[:, None, :] - b_pts[None, :, :]) ** 2).sum(-1)
    return float(np.sqrt(d2.min()))


def sampled_point_box_distance(p, bmin, bmax) -> float:
    axes = [_axis_candidates(bmin[i], bmax[i], p[i], p[i]) for i in range(3)]
    pts = np.array(np.meshgrid(*axes, indexing="ij")).reshape(3, -1).T
    return float(np.sqrt(((pts - np.asarray(p)) ** 2).sum(-1).min()))


# ------------------------------------------- node-assignment transcriptions


def _in_box(p, lo, hi) -> bool:
    return bool(np.all(p >= lo) and np.all(p <= hi))


def transcribe_assign_proposal(nodes, bmin, bmax, delta, collision_free_fn):
    inside = [i for i, p in enumerate(nodes) if _in_box(p, bmin, bmax)]
    if inside:
        return inside
    out = []
    for i, p in enumerate(nodes):
        if _in_box(p, bmin - delta, bmax + delta):
            nearest = np.clip(p, bmin, bmax)
            if collision_free_fn(p, nearest):
                out.append(i)
    return out


def transcribe_assign_object(nodes, bmin, bmax, delta, collision_free_fn):
    result = [i for i, p in enumerate(nodes) if _in_box(p, bmin, bmax)]
    for i, p in enumerate(nodes):
        if i in result:
            continue
        if _in_box(p, bmin - delta, bmax + delta):
            nearest = np.clip(p, bmin, bmax)
            if collision_free_fn(p, nearest):
                result.append(i)
    return sorted(result)


def transcribe_assign_region(nodes, bmin, bmax):
    return [i for i, p in enumerate(nodes) if _in_box(p, bmin, bmax)]
