"""Axis-aligned box and rigid-transform helpers shared across modules."""

from __future__ import annotations

import numpy as np


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(-1)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise ValueError(f"expected a finite 3D point, got {p!r}")
    return a


def as_box(bmin, bmax) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = as_point(bmin), as_point(bmax)
    if np.any(lo > hi):
        raise ValueError(f"degenerate box: min {lo} exceeds max {hi}")
    return lo, hi


def box_contains_points(bmin, bmax, points: np.ndarray) -> np.ndarray:
    """Inclusive containment test for an (N, 3) array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return np.all((pts >= bmin) & (pts <= bmax), axis=1)


def box_contains_box(outer_min, outer_max, inner_min, inner_max, eps: float = 0.0) -> bool:
    return bool(
        np.all(np.asarray(inner_min) >= np.asarray(outer_min) - eps)
        and np.all(np.asarray(inner_max) <= np.asarray(outer_max) + eps)
    )


def clamp_to_box(points: np.ndarray, bmin, bmax) -> np.ndarray:
    """Nearest point(s) on the box to the given point(s)."""
    return np.clip(points, bmin, bmax)


def point_box_distance(p, bmin, bmax) -> float:
    p = as_point(p)
    lo, hi = as_box(bmin, bmax)
    return float(np.linalg.norm(p - np.clip(p, lo, hi)))


def box_box_distance(amin, amax, bmin, bmax) -> float:
    """Minimum Euclidean distance between two boxes; 0 when they intersect."""
    alo, ahi = as_box(amin, amax)
    blo, bhi = as_box(bmin, bmax)
    gap = np.maximum(0.0, np.maximum(blo - ahi, alo - bhi))
    return float(np.linalg.norm(gap))


def box_volume(bmin, bmax) -> float:
    return float(np.prod(np.asarray(bmax, dtype=float) - np.asarray(bmin, dtype=float)))


def is_rigid_transform(pose: np.ndarray, tol: float = 1e-6) -> bool:
    """True when pose is a 4x4 rigid transform: R orthonormal, det +1, last row (0,0,0,1)."""
    pose = np.asarray(pose, dtype=float)
    if pose.shape != (4, 4) or not np.all(np.isfinite(pose)):
        return False
    r = pose[:3, :3]
    if not np.allclose(r @ r.T, np.eye(3), atol=tol):
        return False
    if abs(np.linalg.det(r) - 1.0) > tol:
        return False
    return bool(np.allclose(pose[3], [0.0, 0.0, 0.0, 1.0], atol=tol))
