"""Depth statistics and the close-up view filter."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..params import ConstructionParams


class NoValidDepthError(ValueError):
    """The depth image contains no valid pixels."""


@dataclass(frozen=True)
class DepthStats:
    mean: float  # meters
    median: float
    q80: float  # 80th percentile, the viewpoint's far-plane distance


def valid_depth_mask(depth: np.ndarray, valid_range=(0.0, math.inf)) -> np.ndarray:
    """Valid pixels: finite, strictly positive, and within the declared range."""
    lo, hi = valid_range
    d = np.asarray(depth)
    with np.errstate(invalid="ignore"):
        return np.isfinite(d) & (d > 0) & (d >= lo) & (d <= hi)


def compute_depth_stats(depth: np.ndarray, valid_range=(0.0, math.inf)) -> DepthStats:
    """Mean, median, and 80th-percentile depth over the valid pixels.

    The percentile interpolates linearly between order statistics.
    """
    values = np.asarray(depth, dtype=float)[valid_depth_mask(depth, valid_range)]
    if values.size == 0:
        raise NoValidDepthError("no valid depth pixels")
    return DepthStats(
        mean=float(values.mean()),
        median=float(np.median(values)),
        q80=float(np.percentile(values, 80.0)),
    )


def depth_filter(stats: DepthStats, params: ConstructionParams) -> bool:
    """True to keep the frame; close-up views (low mean OR low median) are dropped.

    Boundary rule: a frame exactly at a threshold is kept.
    """
    return not (
        stats.mean < params.depth_mean_threshold or stats.median < params.depth_median_threshold
    )
