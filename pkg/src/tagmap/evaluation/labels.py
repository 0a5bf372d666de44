"""Labeled entity instances (ground truth boxes) and their JSON loader."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KINDS = ("object", "region")

# Matterport label conventions: analogous region classes are folded together.
MP3D_REGION_RELABELS = {
    "familyroom": "living room",
    "lounge": "living room",
    "toilet": "bathroom",
}


class LabelsError(Exception):
    pass


@dataclass(frozen=True)
class LabeledEntity:
    class_name: str
    kind: str  # "object" | "region"
    aabb_min: tuple[float, float, float]
    aabb_max: tuple[float, float, float]
    instance_id: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        lo = np.asarray(self.aabb_min, dtype=float)
        hi = np.asarray(self.aabb_max, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,) or np.any(lo > hi) or not (
            np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))
        ):
            raise ValueError(f"invalid box for {self.class_name!r}: {self.aabb_min}..{self.aabb_max}")

    @property
    def box(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.aabb_min, dtype=float), np.asarray(self.aabb_max, dtype=float)


def load_labels(path, convention: str | None = None) -> list[LabeledEntity]:
    """Load a labels file: a JSON array of {class, kind, aabb_min, aabb_max}
    or {"convention": ..., "labels": [...]}. The ``mp3d`` convention applies
    the region relabeling rules (familyroom/lounge -> living room, the toilet
    region -> bathroom)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise LabelsError(f"cannot read labels file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise LabelsError(f"labels file {path} is not valid JSON: {e}") from e

    if isinstance(data, dict):
        convention = convention or data.get("convention")
        data = data.get("labels")
    if not isinstance(data, list):
        raise LabelsError(f"labels file {path} has no label array")

    relabel = convention is not None and convention.lower() == "mp3d"
    out: list[LabeledEntity] = []
    try:
        for i, item in enumerate(data):
            name = str(item["class"]).strip().lower()
            kind = str(item["kind"]).strip().lower()
            if relabel and kind == "region":
                name = MP3D_REGION_RELABELS.get(name, name)
            out.append(
                LabeledEntity(
                    class_name=name,
                    kind=kind,
                    aabb_min=tuple(float(x) for x in item["aabb_min"]),
                    aabb_max=tuple(float(x) for x in item["aabb_max"]),
                    instance_id=int(item.get("id", i)),
                )
            )
    except (KeyError, TypeError, ValueError) as e:
        raise LabelsError(f"malformed labels file {path}: {e}") from e
    return out
