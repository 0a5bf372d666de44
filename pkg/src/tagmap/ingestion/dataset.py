"""Posed RGB-D dataset access via a JSON manifest.

Manifest layout: ``{"depth_format": <default>, "frames": [{id, color_path,
depth_path, depth_format?, pose: 16 row-major floats (camera-to-world),
intrinsics: {fx, fy, cx, cy, width, height}}, ...]}``; a bare frame array is
also accepted. Paths are resolved relative to the manifest file. Depth
formats: ``png_mm16`` (16-bit PNG, millimeters) and ``exr_f32`` (32-bit
float EXR, meters).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..store import Intrinsics
from . import exr

DEPTH_FORMATS = ("png_mm16", "exr_f32")


class DatasetError(Exception):
    """Unreadable or inconsistent dataset input."""


@dataclass
class Frame:
    id: int
    color_path: Path
    depth_path: Path
    depth_format: str
    pose: np.ndarray  # (4, 4) camera-to-world
    intrinsics: Intrinsics


def load_manifest(path) -> list[Frame]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DatasetError(f"cannot read manifest {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise DatasetError(f"manifest {path} is not valid JSON: {e}") from e

    if isinstance(data, dict):
        default_format = data.get("depth_format", "png_mm16")
        raw_frames = data.get("frames")
    else:
        default_format = "png_mm16"
        raw_frames = data
    if not isinstance(raw_frames, list):
        raise DatasetError(f"manifest {path} has no frame list")

    base = path.parent
    frames = []
    try:
        for fd in raw_frames:
            fmt = fd.get("depth_format", default_format)
            if fmt not in DEPTH_FORMATS:
                raise ValueError(f"unknown depth format {fmt!r}")
            pose = np.asarray(fd["pose"], dtype=float)
            if pose.size != 16:
                raise ValueError(f"frame {fd.get('id')}: pose must hold 16 floats")
            frames.append(
                Frame(
                    id=int(fd["id"]),
                    color_path=base / fd["color_path"],
                    depth_path=base / fd["depth_path"],
                    depth_format=fmt,
                    pose=pose.reshape(4, 4),
                    intrinsics=Intrinsics.from_dict(fd["intrinsics"]),
                )
            )
    except (KeyError, TypeError, ValueError) as e:
        raise DatasetError(f"malformed manifest {path}: {e}") from e
    return frames


def load_depth(frame: Frame) -> np.ndarray:
    """Depth image in meters, float32, shaped (height, width) per intrinsics."""
    try:
        if frame.depth_format == "png_mm16":
            with Image.open(frame.depth_path) as im:
                arr = np.asarray(im)
            if arr.dtype not in (np.uint16, np.int32, np.uint8):
                raise DatasetError(
                    f"{frame.depth_path}: expected a 16-bit PNG, got dtype {arr.dtype}"
                )
            depth = arr.astype(np.float32) / 1000.0
        elif frame.depth_format == "exr_f32":
            depth = exr.read_depth_exr(frame.depth_path)
        else:
            raise DatasetError(f"unknown depth format {frame.depth_format!r}")
    except (OSError, exr.ExrError) as e:
        raise DatasetError(f"cannot read depth for frame {frame.id}: {e}") from e
    expected = (frame.intrinsics.height, frame.intrinsics.width)
    if depth.shape != expected:
        raise DatasetError(
            f"frame {frame.id}: depth shape {depth.shape} does not match intrinsics {expected}"
        )
    return depth


def load_color(frame: Frame) -> Image.Image:
    try:
        with Image.open(frame.color_path) as im:
            img = im.convert("RGB")
    except OSError as e:
        raise DatasetError(f"cannot read color for frame {frame.id}: {e}") from e
    if img.size != (frame.intrinsics.width, frame.intrinsics.height):
        raise DatasetError(
            f"frame {frame.id}: color size {img.size} does not match intrinsics "
            f"({frame.intrinsics.width}, {frame.intrinsics.height})"
        )
    return img
