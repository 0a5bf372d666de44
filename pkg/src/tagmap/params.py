"""Default parameters for map construction, localization, and evaluation.

All defaults here are the ones used throughout; the CLI exposes them via
``tagmap --show-config`` and accepts overrides per run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class ConstructionParams:
    """Parameters of the map-building pipeline (depth filter + crop ensemble)."""

    depth_mean_threshold: float = 0.6  # meters
    depth_median_threshold: float = 0.6  # meters
    crop_percentages: tuple[float, ...] = (5.0, 10.0)  # percent of each border
    valid_depth_range: tuple[float, float] = (0.0, math.inf)  # meters, exclusive min

    def __post_init__(self):
        if self.depth_mean_threshold <= 0 or self.depth_median_threshold <= 0:
            raise ValueError("depth thresholds must be > 0")
        crops = tuple(float(p) for p in self.crop_percentages)
        object.__setattr__(self, "crop_percentages", crops)
        for p in crops:
            if not 0 < p < 50:
                raise ValueError(f"crop percentage {p} outside (0, 50)")
        lo, hi = self.valid_depth_range
        if not (lo >= 0 and hi > lo):
            raise ValueError(f"invalid depth range {self.valid_depth_range}")
        object.__setattr__(self, "valid_depth_range", (float(lo), float(hi)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["crop_percentages"] = list(self.crop_percentages)
        lo, hi = self.valid_depth_range
        d["valid_depth_range"] = [lo, None if math.isinf(hi) else hi]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ConstructionParams":
        kwargs = dict(d)
        if "crop_percentages" in kwargs:
            kwargs["crop_percentages"] = tuple(kwargs["crop_percentages"])
        if "valid_depth_range" in kwargs:
            lo, hi = kwargs["valid_depth_range"]
            kwargs["valid_depth_range"] = (lo, math.inf if hi is None else hi)
        return cls(**kwargs)


@dataclass(frozen=True)
class LocalizationParams:
    """Parameters of the frustum-voting localization pipeline."""

    voxel_size: float = 0.2  # meters
    dbscan_eps: float = 0.4  # meters
    dbscan_min_points: int = 5
    normalized_vote_thresholds: tuple[float, ...] = (0.00, 0.25, 0.50, 0.75)
    near_plane: float = 0.2  # meters

    def __post_init__(self):
        if self.voxel_size <= 0 or self.dbscan_eps <= 0 or self.near_plane <= 0:
            raise ValueError("voxel_size, dbscan_eps and near_plane must be > 0")
        if self.dbscan_min_points < 1:
            raise ValueError("dbscan_min_points must be >= 1")
        fr = tuple(float(t) for t in self.normalized_vote_thresholds)
        object.__setattr__(self, "normalized_vote_thresholds", fr)
        if not fr:
            raise ValueError("need at least one vote threshold")
        for a, b in zip(fr, fr[1:]):
            if not a < b:
                raise ValueError("vote thresholds must be strictly increasing")
        if fr[0] < 0 or fr[-1] >= 1:
            raise ValueError("vote thresholds must lie in [0, 1)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["normalized_vote_thresholds"] = list(self.normalized_vote_thresholds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LocalizationParams":
        kwargs = dict(d)
        if "normalized_vote_thresholds" in kwargs:
            kwargs["normalized_vote_thresholds"] = tuple(kwargs["normalized_vote_thresholds"])
        return cls(**kwargs)


@dataclass(frozen=True)
class EvaluationParams:
    """Parameters of the grid-graph evaluation pipeline."""

    grid_resolution: float = 0.5  # meters
    inside_k_neighbors: int = 30
    inside_mean_dist_threshold: float = 2.0  # meters
    inside_dot_threshold: float = 0.0
    object_inflation: float = 1.0  # meters, labeled-object ring
    object_thresholds: tuple[float, ...] = (0.1, 0.5, 1.0, 2.0)
    region_thresholds: tuple[float, ...] = (0.5, 1.0, 2.0, 3.0)

    def __post_init__(self):
        object.__setattr__(self, "object_thresholds", tuple(float(t) for t in self.object_thresholds))
        object.__setattr__(self, "region_thresholds", tuple(float(t) for t in self.region_thresholds))
        if self.grid_resolution <= 0:
            raise ValueError("grid_resolution must be > 0")
        if self.inside_k_neighbors < 1:
            raise ValueError("inside_k_neighbors must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["object_thresholds"] = list(self.object_thresholds)
        d["region_thresholds"] = list(self.region_thresholds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationParams":
        kwargs = dict(d)
        for key in ("object_thresholds", "region_thresholds"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def default_config() -> dict:
    """Every tunable default, grouped the way --show-config prints them."""
    return {
        "construction": ConstructionParams().to_dict(),
        "localization": LocalizationParams().to_dict(),
        "evaluation": EvaluationParams().to_dict(),
    }
