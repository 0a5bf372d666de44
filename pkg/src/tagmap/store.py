"""The tag-map database: unique tags, viewpoint records, and their relation.

The map is an inverted index from text tags to the viewpoints they were
recognized from. Only pose, intrinsics, and a far-plane depth statistic are
kept per viewpoint; the source RGB and depth images are never stored, so the
file size is independent of image resolution.

Construction is single-writer; once built the map is treated as immutable and
is safe to read from any number of threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import is_rigid_transform
from .params import ConstructionParams

FORMAT_VERSION = 1


class TagMapError(Exception):
    """Base class for tag-map storage errors."""


class DuplicateViewpointError(TagMapError):
    """A viewpoint id was inserted twice."""


class TagMapFormatError(TagMapError):
    """The map file is malformed."""


class TagMapVersionError(TagMapError):
    """The map file declares an unsupported format version."""


def normalize_tag(tag: str) -> str:
    """Canonical tag key: lowercase, trimmed, internal whitespace collapsed."""
    return " ".join(str(tag).split()).lower()


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError(f"focal lengths must be > 0, got fx={self.fx} fy={self.fy}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if not (0 <= self.cx < self.width) or not (0 <= self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside image {self.width}x{self.height}"
            )

    def to_dict(self) -> dict:
        return {
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Intrinsics":
        return cls(
            fx=float(d["fx"]),
            fy=float(d["fy"]),
            cx=float(d["cx"]),
            cy=float(d["cy"]),
            width=int(d["width"]),
            height=int(d["height"]),
        )


@dataclass(eq=False)
class Viewpoint:
    """One kept camera frame: pose (camera-to-world, meters), intrinsics, and
    the 80th-percentile depth of its source frame (the frustum far plane)."""

    id: int
    pose: np.ndarray  # (4, 4) camera-to-world
    intrinsics: Intrinsics
    far_plane_dist: float

    def __post_init__(self):
        self.pose = np.asarray(self.pose, dtype=float).reshape(4, 4)
        if not is_rigid_transform(self.pose):
            raise ValueError(f"viewpoint {self.id}: pose is not a rigid transform")
        if not self.far_plane_dist > 0:
            raise ValueError(f"viewpoint {self.id}: far_plane_dist must be > 0")
        self.id = int(self.id)
        self.far_plane_dist = float(self.far_plane_dist)

    @property
    def position(self) -> np.ndarray:
        return self.pose[:3, 3]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Viewpoint)
            and self.id == other.id
            and np.array_equal(self.pose, other.pose)
            and self.intrinsics == other.intrinsics
            and self.far_plane_dist == other.far_plane_dist
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "pose": [float(x) for x in self.pose.reshape(-1)],  # 16 row-major floats
            "intrinsics": self.intrinsics.to_dict(),
            "far_plane_dist": self.far_plane_dist,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Viewpoint":
        pose = np.asarray(d["pose"], dtype=float)
        if pose.size != 16:
            raise ValueError("pose must hold 16 row-major floats")
        return cls(
            id=int(d["id"]),
            pose=pose.reshape(4, 4),
            intrinsics=Intrinsics.from_dict(d["intrinsics"]),
            far_plane_dist=float(d["far_plane_dist"]),
        )


@dataclass
class TagEntry:
    """One unique tag and the viewpoints it was recognized from."""

    tag: str
    views: dict[int, float]  # viewpoint id -> tagger confidence

    @property
    def viewpoint_ids(self) -> set[int]:
        return set(self.views)


class TagMap:
    """Inverted index from tags to viewpoints, with JSON persistence."""

    def __init__(self, build_params: ConstructionParams | None = None):
        self.build_params = build_params or ConstructionParams()
        self._viewpoints: dict[int, Viewpoint] = {}
        self._entries: dict[str, dict[int, float]] = {}

    # ------------------------------------------------------------------ write

    def insert(self, viewpoint: Viewpoint, tags=()) -> None:
        """Register a viewpoint and its recognized tags.

        ``tags`` is an iterable of (tag, confidence) pairs or a mapping; a
        missing/None confidence defaults to 1.0. Tag keys are normalized. If a
        normalization collision occurs within one insert, the higher
        confidence wins.
        """
        if viewpoint.id in self._viewpoints:
            raise DuplicateViewpointError(f"viewpoint id {viewpoint.id} already present")
        if isinstance(tags, str):
            raise TypeError("tags must be an iterable of (tag, confidence) pairs, not a string")
        items = tags.items() if isinstance(tags, dict) else tags
        cleaned: dict[str, float] = {}
        for item in items:
            if isinstance(item, str):
                tag, conf = item, 1.0
            else:
                tag, conf = item
            tag = normalize_tag(tag)
            if not tag:
                continue
            conf = 1.0 if conf is None else float(conf)
            if not 0.0 <= conf <= 1.0:
                raise ValueError(f"confidence {conf} for tag {tag!r} outside [0, 1]")
            cleaned[tag] = max(conf, cleaned.get(tag, 0.0))
        self._viewpoints[viewpoint.id] = viewpoint
        for tag, conf in cleaned.items():
            self._entries.setdefault(tag, {})[viewpoint.id] = conf

    # ------------------------------------------------------------------- read

    def __len__(self) -> int:
        return len(self._viewpoints)

    def __contains__(self, tag: str) -> bool:
        return normalize_tag(tag) in self._entries

    @property
    def viewpoints(self) -> dict[int, Viewpoint]:
        return self._viewpoints

    def entry(self, tag: str) -> TagEntry | None:
        key = normalize_tag(tag)
        views = self._entries.get(key)
        return None if views is None else TagEntry(key, dict(views))

    def viewpoints_for(self, tag: str) -> list[tuple[Viewpoint, float]]:
        """All viewpoints registered for the tag, by descending confidence
        then ascending id; empty for unknown tags."""
        views = self._entries.get(normalize_tag(tag), {})
        order = sorted(views.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(self._viewpoints[vid], conf) for vid, conf in order]

    def unique_tags(self) -> list[str]:
        return sorted(self._entries)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TagMap)
            and self.build_params == other.build_params
            and self._viewpoints == other._viewpoints
            and self._entries == other._entries
        )

    # ---------------------------------------------------------- serialization

    def to_dict(self) -> dict:
        entries = []
        for tag in sorted(self._entries):
            views = self._entries[tag]
            order = sorted(views.items(), key=lambda kv: (-kv[1], kv[0]))
            entries.append({"tag": tag, "views": [{"id": vid, "conf": conf} for vid, conf in order]})
        return {
            "version": FORMAT_VERSION,
            "build_params": self.build_params.to_dict(),
            "viewpoints": [self._viewpoints[vid].to_dict() for vid in sorted(self._viewpoints)],
            "entries": entries,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TagMap":
        if not isinstance(data, dict):
            raise TagMapFormatError("map file root must be a JSON object")
        version = data.get("version")
        if version != FORMAT_VERSION:
            raise TagMapVersionError(f"unsupported map format version {version!r}")
        try:
            m = cls(build_params=ConstructionParams.from_dict(data["build_params"]))
            for vd in data["viewpoints"]:
                vp = Viewpoint.from_dict(vd)
                if vp.id in m._viewpoints:
                    raise ValueError(f"duplicate viewpoint id {vp.id} in file")
                m._viewpoints[vp.id] = vp
            for ed in data["entries"]:
                tag = ed["tag"]
                if tag != normalize_tag(tag):
                    raise ValueError(f"entry tag {tag!r} is not normalized")
                views = ed["views"]
                if not views:
                    raise ValueError(f"entry {tag!r} has no viewpoints")
                if tag in m._entries:
                    raise ValueError(f"duplicate entry for tag {tag!r}")
                m._entries[tag] = {}
                for v in views:
                    vid, conf = int(v["id"]), float(v["conf"])
                    if vid not in m._viewpoints:
                        raise ValueError(f"entry {tag!r} references unknown viewpoint {vid}")
                    if not 0.0 <= conf <= 1.0:
                        raise ValueError(f"confidence {conf} outside [0, 1]")
                    m._entries[tag][vid] = conf
        except (KeyError, TypeError, ValueError) as e:
            raise TagMapFormatError(f"malformed map file: {e}") from e
        return m

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TagMap":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise TagMapError(f"cannot read map file {path}: {e}") from e
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise TagMapFormatError(f"map file {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)
