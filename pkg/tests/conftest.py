"""Shared fixtures: synthetic scenes, datasets on disk, and scripted providers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from tagmap.evaluation.mesh import SceneMesh
from tagmap.ingestion import FileTagger, build_map, load_manifest
from tagmap.params import ConstructionParams
from tagmap.store import Intrinsics, TagMap, Viewpoint

DATA_DIR = Path(__file__).parent / "data"


# ------------------------------------------------------------------ geometry


def make_pose(eye, target, up=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Camera-to-world pose looking from eye toward target (+z forward,
    +y down in camera frame)."""
    eye = np.asarray(eye, dtype=float)
    forward = np.asarray(target, dtype=float) - eye
    forward = forward / np.linalg.norm(forward)
    up = np.asarray(up, dtype=float)
    if abs(np.dot(forward, up)) > 0.999:
        up = np.array([0.0, 1.0, 0.0])
    right = np.cross(forward, up)
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    pose = np.eye(4)
    pose[:3, 0] = right
    pose[:3, 1] = down
    pose[:3, 2] = forward
    pose[:3, 3] = eye
    return pose


def box_shell_mesh(bmin, bmax, pitch: float, into_box: bool = False):
    """Subdivided box surface as (vertices, triangles).

    Face winding puts normals away from the box interior by default (a room
    whose inside is free space); ``into_box=True`` flips them (an obstacle
    whose outside is free space).
    """
    bmin = np.asarray(bmin, dtype=float)
    bmax = np.asarray(bmax, dtype=float)
    vertices: list[tuple] = []
    vert_index: dict[tuple, int] = {}
    triangles: list[tuple[int, int, int]] = []

    def vid(p):
        key = tuple(np.round(p, 9))
        if key not in vert_index:
            vert_index[key] = len(vertices)
            vertices.append(key)
        return vert_index[key]

    for axis in range(3):
        b, c = (axis + 1) % 3, (axis + 2) % 3
        nb = max(1, int(round((bmax[b] - bmin[b]) / pitch)))
        nc = max(1, int(round((bmax[c] - bmin[c]) / pitch)))
        us = np.linspace(bmin[b], bmax[b], nb + 1)
        vs = np.linspace(bmin[c], bmax[c], nc + 1)
        for sign, coord in ((1, bmax[axis]), (-1, bmin[axis])):
            flip = (sign < 0) != into_box
            for i in range(nb):
                for j in range(nc):
                    quad = []
                    for du, dv in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        p = np.empty(3)
                        p[axis] = coord
                        p[b] = us[i + du]
                        p[c] = vs[j + dv]
                        quad.append(vid(p))
                    q0, q1, q2, q3 = quad
                    tris = [(q0, q1, q2), (q0, q2, q3)]
                    if flip:
                        tris = [(q0, q2, q1), (q0, q3, q2)]
                    triangles.extend(tris)
    return np.asarray(vertices, dtype=float), np.asarray(triangles, dtype=np.int64)


def merge_parts(parts) -> SceneMesh:
    verts = []
    tris = []
    offset = 0
    for v, t in parts:
        verts.append(v)
        tris.append(t + offset)
        offset += len(v)
    return SceneMesh(np.vstack(verts), np.vstack(tris))


def ring_eyes(center, radius: float, height: float, n: int, start_angle: float = 0.0):
    cx, cy, _ = center
    return [
        (cx + radius * math.cos(a), cy + radius * math.sin(a), height)
        for a in np.linspace(start_angle, start_angle + 2 * math.pi, n, endpoint=False)
    ]


# ------------------------------------------------------------------- taggers


class ScriptedTagger:
    """Deterministic tagger for tests: tags per frame id, optional per-member
    overrides keyed by (frame_id, crop_percent)."""

    def __init__(self, per_frame: dict, per_member: dict | None = None):
        self.per_frame = per_frame
        self.per_member = per_member or {}
        self.calls = 0

    def tag_image(self, image, *, frame_id=None, crop_percent=None):
        self.calls += 1
        key = (frame_id, crop_percent)
        if key in self.per_member:
            return list(self.per_member[key])
        return list(self.per_frame.get(frame_id, []))


# ------------------------------------------------------- datasets on disk


def write_png_depth(path, meters: np.ndarray):
    mm = np.clip(np.asarray(meters, dtype=float) * 1000.0, 0, 65535).astype(np.uint16)
    Image.fromarray(mm).save(path)


def write_color(path, size):
    Image.new("RGB", size, (90, 120, 150)).save(path)


@dataclass
class DiskDataset:
    root: Path
    manifest: Path
    tags_dir: Path
    frame_tags: dict[int, dict[str, float]] = field(default_factory=dict)


def write_dataset(root: Path, frames_spec: list[dict], intrinsics: dict,
                  crop_percentages=(5.0, 10.0)) -> DiskDataset:
    """Materialize a dataset directory: depth/color images, per-member tag
    files, and the manifest.

    frames_spec items: {id, depth (H, W) meters array or scalar, pose,
    tags: [(tag, conf)], member_tags: {crop: [(tag, conf)]} optional}.
    """
    root.mkdir(parents=True, exist_ok=True)
    tags_dir = root / "tags"
    tags_dir.mkdir(exist_ok=True)
    w, h = intrinsics["width"], intrinsics["height"]
    manifest = {"depth_format": "png_mm16", "frames": []}
    ds = DiskDataset(root=root, manifest=root / "manifest.json", tags_dir=tags_dir)

    for spec in frames_spec:
        fid = spec["id"]
        depth = spec["depth"]
        if np.isscalar(depth):
            depth = np.full((h, w), float(depth))
        write_png_depth(root / f"depth_{fid}.png", depth)
        write_color(root / f"color_{fid}.png", (w, h))
        tags = spec.get("tags", [])
        member_tags = spec.get("member_tags", {})
        for crop in (None, *crop_percentages):
            member = member_tags.get(crop, tags)
            suffix = "" if crop is None else f"_crop{crop:g}"
            (tags_dir / f"{fid}{suffix}.json").write_text(
                json.dumps([{"tag": t, "confidence": c} for t, c in member])
            )
        manifest["frames"].append(
            {
                "id": fid,
                "color_path": f"color_{fid}.png",
                "depth_path": f"depth_{fid}.png",
                "pose": [float(x) for x in np.asarray(spec["pose"]).reshape(-1)],
                "intrinsics": intrinsics,
            }
        )
        ds.frame_tags[fid] = dict(tags)
    ds.manifest.write_text(json.dumps(manifest))
    return ds


# ------------------------------------------------------- the apartment scene

APART_INTRINSICS = {"fx": 40.0, "fy": 40.0, "cx": 32.0, "cy": 24.0, "width": 64, "height": 48}

APART_OBJECTS = {
    # entity tag -> (aabb_min, aabb_max); all watched by a 6-camera ring
    "table": ((1.55, 1.55, 0.35), (2.45, 2.25, 0.85)),
    "sofa": ((1.25, 2.95, 0.25), (2.15, 3.65, 0.75)),
    "fridge": ((5.6, 2.2, 0.0), (6.4, 3.0, 1.5)),
}
APART_REGIONS = {
    "living room": ((0.0, 0.0, 0.0), (3.9, 5.0, 2.5)),
    "kitchen": ((4.1, 0.0, 0.0), (8.0, 5.0, 2.5)),
}
# tags recognized in a frame beside the watched entity (room context)
APART_ROOM_TAG = {"table": "living room", "sofa": "living room", "fridge": "kitchen"}


def apartment_mesh() -> SceneMesh:
    """Two-room apartment: 8x5x2.5 m shell and a doorway wall at x ~ 4."""
    parts = [
        box_shell_mesh((0, 0, 0), (8, 5, 2.5), pitch=0.5),
        box_shell_mesh((3.9, 0.0, 0.0), (4.1, 2.2, 2.5), pitch=0.25, into_box=True),
        box_shell_mesh((3.9, 2.8, 0.0), (4.1, 5.0, 2.5), pitch=0.25, into_box=True),
    ]
    return merge_parts(parts)


def apartment_frames_spec() -> list[dict]:
    spec = []
    fid = 0
    for tag, (lo, hi) in APART_OBJECTS.items():
        center = (np.asarray(lo) + np.asarray(hi)) / 2.0
        room_tag = APART_ROOM_TAG[tag]
        for eye in ring_eyes(center, radius=1.4, height=1.7, n=6):
            tags = [(tag, 0.8), (room_tag, 0.9)]
            spec.append({"id": fid, "depth": 2.5, "pose": make_pose(eye, center), "tags": tags})
            fid += 1
    # single-view false positives on two existing frames
    spec[0]["tags"] = spec[0]["tags"] + [("unicorn", 0.4)]
    spec[7]["tags"] = spec[7]["tags"] + [("plant", 0.5)]
    # a close-up frame that the depth filter must discard
    spec.append({
        "id": fid,
        "depth": 0.3,
        "pose": make_pose((1.0, 1.0, 1.0), (2.0, 1.0, 1.0)),
        "tags": [("wall", 0.9)],
    })
    return spec


@pytest.fixture(scope="session")
def apartment(tmp_path_factory):
    """Apartment scene: mesh, labels, on-disk dataset, and the built map."""
    root = tmp_path_factory.mktemp("apartment")
    ds = write_dataset(root / "dataset", apartment_frames_spec(), APART_INTRINSICS)
    frames = load_manifest(ds.manifest)
    tag_map, summary = build_map(frames, FileTagger(ds.tags_dir), ConstructionParams())

    mesh = apartment_mesh()
    labels = [
        {"class": tag, "kind": "object", "aabb_min": list(lo), "aabb_max": list(hi)}
        for tag, (lo, hi) in APART_OBJECTS.items()
    ] + [
        {"class": tag, "kind": "region", "aabb_min": list(lo), "aabb_max": list(hi)}
        for tag, (lo, hi) in APART_REGIONS.items()
    ]
    labels_path = root / "labels.json"
    labels_path.write_text(json.dumps(labels))
    mapping = {name: [name] for name in (*APART_OBJECTS, *APART_REGIONS)}
    mapping_path = root / "mapping.json"
    mapping_path.write_text(json.dumps(mapping))

    from tagmap.evaluation.mesh import save_ply

    mesh_path = root / "scene.ply"
    save_ply(mesh_path, mesh, binary=True)
    map_path = root / "map.json"
    tag_map.save(map_path)

    return {
        "root": root,
        "dataset": ds,
        "map": tag_map,
        "map_path": map_path,
        "summary": summary,
        "mesh": mesh,
        "mesh_path": mesh_path,
        "labels_path": labels_path,
        "mapping": mapping,
        "mapping_path": mapping_path,
        "objects": APART_OBJECTS,
        "regions": APART_REGIONS,
    }


# ------------------------------------------------------------- the lab scene


@pytest.fixture(scope="session")
def grounded_queries() -> list[dict]:
    return json.loads((DATA_DIR / "grounded_queries.json").read_text())


def lab_tag_map(entities: list[str]) -> TagMap:
    """Abstract lab scene: each entity watched by a 5-camera ring around its
    own spot on a grid, so every tag localizes to at least one proposal."""
    intr = Intrinsics(**APART_INTRINSICS)
    tag_map = TagMap()
    vid = 0
    for i, entity in enumerate(entities):
        center = np.array([4.0 * (i % 5), 4.0 * (i // 5), 0.8])
        for eye in ring_eyes(center, radius=1.3, height=1.6, n=5):
            vp = Viewpoint(id=vid, pose=make_pose(eye, center), intrinsics=intr,
                           far_plane_dist=2.2)
            tag_map.insert(vp, [(entity, 0.75)])
            vid += 1
    return tag_map


@pytest.fixture(scope="session")
def lab_map(grounded_queries) -> TagMap:
    return lab_tag_map([q["entity"] for q in grounded_queries])


def mock_script_for(queries: list[dict]) -> dict:
    scenarios = []
    for q in queries:
        scenarios.append(
            {
                "match": q["query"],
                "rounds": [
                    [{"name": "localize_tag", "arguments": {"tag": q["entity"]}}],
                    [{"name": "set_goal", "arguments": {"tag": q["entity"], "proposal_index": 0}}],
                ],
                "response": f"I found a {q['entity']} in the map (see the localization "
                            "confidence level above) and set it as the navigation goal.",
            }
        )
    return {"scenarios": scenarios, "fallback": "Nothing in the tag list matches that request."}


@pytest.fixture(scope="session")
def mock_script(grounded_queries) -> dict:
    return mock_script_for(grounded_queries)


@pytest.fixture(scope="session")
def lab_paths(tmp_path_factory, lab_map, mock_script):
    root = tmp_path_factory.mktemp("lab")
    map_path = root / "lab_map.json"
    lab_map.save(map_path)
    script_path = root / "mock_script.json"
    script_path.write_text(json.dumps(mock_script))
    return {"map_path": map_path, "script_path": script_path}
