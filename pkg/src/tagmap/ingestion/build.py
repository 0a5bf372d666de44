"""Build a tag map from a posed RGB-D frame stream.

Per frame: depth statistics -> close-up filter -> crop-ensemble tagging ->
registration. Frames are processed by a bounded worker pool; insertion is
serialized in frame order, so the output is independent of scheduling.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..params import ConstructionParams
from ..store import TagMap, Viewpoint
from .dataset import DatasetError, Frame, load_color, load_depth
from .depth import NoValidDepthError, compute_depth_stats, depth_filter
from .taggers import Tagger, TaggerError, crop_ensemble_tags

log = logging.getLogger(__name__)

# Discard causes, as recorded in the build summary.
CAUSE_CLOSE_UP = "close_up"
CAUSE_NO_DEPTH = "no_depth"
CAUSE_UNREADABLE = "unreadable"
CAUSE_TAGGER_ERROR = "tagger_error"
CAUSE_INVALID_VIEWPOINT = "invalid_viewpoint"


@dataclass
class BuildSummary:
    total: int = 0
    kept: int = 0
    discarded: dict[str, int] = field(default_factory=dict)
    kept_ids: list[int] = field(default_factory=list)
    unique_tags: int = 0

    def discard(self, cause: str) -> None:
        self.discarded[cause] = self.discarded.get(cause, 0) + 1

    @property
    def n_discarded(self) -> int:
        return sum(self.discarded.values())

    def to_dict(self) -> dict:
        return {
            "frames_total": self.total,
            "frames_kept": self.kept,
            "frames_discarded": dict(sorted(self.discarded.items())),
            "kept_ids": list(self.kept_ids),
            "unique_tags": self.unique_tags,
        }


def _process_frame(frame: Frame, tagger: Tagger, params: ConstructionParams):
    """Returns ("kept", viewpoint, tags) or ("discarded", cause, detail)."""
    try:
        depth = load_depth(frame)
    except DatasetError as e:
        return ("discarded", CAUSE_UNREADABLE, str(e))
    try:
        stats = compute_depth_stats(depth, params.valid_depth_range)
    except NoValidDepthError:
        return ("discarded", CAUSE_NO_DEPTH, f"frame {frame.id}: no valid depth pixels")
    if not depth_filter(stats, params):
        return ("discarded", CAUSE_CLOSE_UP,
                f"frame {frame.id}: mean {stats.mean:.3f} m / median {stats.median:.3f} m")
    try:
        color = load_color(frame)
        tags = crop_ensemble_tags(color, tagger, params.crop_percentages, frame_id=frame.id)
    except TaggerError as e:
        return ("discarded", CAUSE_TAGGER_ERROR, str(e))
    except (DatasetError, ValueError) as e:
        return ("discarded", CAUSE_UNREADABLE, str(e))
    try:
        viewpoint = Viewpoint(
            id=frame.id,
            pose=frame.pose,
            intrinsics=frame.intrinsics,
            far_plane_dist=stats.q80,
        )
    except ValueError as e:
        return ("discarded", CAUSE_INVALID_VIEWPOINT, str(e))
    return ("kept", viewpoint, tags)


def build_map(frames, tagger: Tagger, params: ConstructionParams | None = None,
              jobs: int | None = None) -> tuple[TagMap, BuildSummary]:
    """Construct a TagMap from a frame stream; viewpoint ids come from frame ids.

    Unreadable frames and tagger failures are skipped with a logged cause. A
    run where every frame is discarded yields an empty map and a warning, not
    an error.
    """
    params = params or ConstructionParams()
    frames = list(frames)
    tag_map = TagMap(build_params=params)
    summary = BuildSummary(total=len(frames))

    workers = max(1, jobs or os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_process_frame, f, tagger, params) for f in frames]
        for frame, fut in zip(frames, futures):
            result = fut.result()
            if result[0] == "discarded":
                _, cause, detail = result
                summary.discard(cause)
                log.info("frame %s discarded (%s): %s", frame.id, cause, detail)
                continue
            _, viewpoint, tags = result
            tag_map.insert(viewpoint, tags)
            summary.kept += 1
            summary.kept_ids.append(viewpoint.id)

    summary.unique_tags = len(tag_map.unique_tags())
    if frames and summary.kept == 0:
        log.warning("all %d frames were discarded; the map is empty", len(frames))
    return tag_map, summary
