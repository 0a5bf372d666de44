"""Triangle-mesh loading (PLY/OBJ), vertex normals, and segment-vs-mesh tests."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree


class MeshError(Exception):
    """Unreadable or unsupported mesh file."""


def compute_vertex_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Area-weighted per-vertex normals; zero vector for unused vertices."""
    v = vertices
    t = triangles
    face_n = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])  # length ~ 2*area
    normals = np.zeros_like(v)
    for k in range(3):
        np.add.at(normals, t[:, k], face_n)
    lengths = np.linalg.norm(normals, axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        return np.where(lengths > 1e-12, normals / lengths, 0.0)


@dataclass
class SceneMesh:
    vertices: np.ndarray  # (V, 3) float64, meters
    triangles: np.ndarray  # (T, 3) int64
    normals: np.ndarray | None = None  # (V, 3), unit; computed when absent
    _kdtree: cKDTree | None = field(default=None, repr=False, compare=False)
    _tri_cache: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(self.vertices)):
            raise MeshError("mesh has non-finite vertex coordinates")
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise MeshError("triangle indices out of range")
        if self.normals is None:
            self.normals = compute_vertex_normals(self.vertices, self.triangles)
        else:
            n = np.asarray(self.normals, dtype=float).reshape(-1, 3)
            if n.shape != self.vertices.shape:
                raise MeshError("normals shape does not match vertices")
            lengths = np.linalg.norm(n, axis=1, keepdims=True)
            with np.errstate(invalid="ignore"):
                self.normals = np.where(lengths > 1e-12, n / lengths, 0.0)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    @property
    def kdtree(self) -> cKDTree:
        if self._kdtree is None:
            self._kdtree = cKDTree(self.vertices)
        return self._kdtree

    def _tris(self):
        if self._tri_cache is None:
            v0 = self.vertices[self.triangles[:, 0]]
            e1 = self.vertices[self.triangles[:, 1]] - v0
            e2 = self.vertices[self.triangles[:, 2]] - v0
            tmin = np.minimum(np.minimum(v0, v0 + e1), v0 + e2)
            tmax = np.maximum(np.maximum(v0, v0 + e1), v0 + e2)
            self._tri_cache = (v0, e1, e2, tmin, tmax)
        return self._tri_cache


def segment_hits_mesh(mesh: SceneMesh, p0, p1) -> bool:
    """True when the open segment p0->p1 intersects any mesh triangle
    (Moller-Trumbore, parameter t in [0, 1])."""
    if mesh.triangles.size == 0:
        return False
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    v0, e1, e2, tmin, tmax = mesh._tris()

    # AABB prefilter: triangles whose box overlaps the segment box.
    smin, smax = np.minimum(p0, p1), np.maximum(p0, p1)
    cand = np.all((tmax >= smin) & (tmin <= smax), axis=1)
    if not cand.any():
        return False
    v0, e1, e2 = v0[cand], e1[cand], e2[cand]

    d = p1 - p0
    pvec = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    ok = np.abs(det) > 1e-12
    if not ok.any():
        return False
    inv = np.zeros_like(det)
    inv[ok] = 1.0 / det[ok]
    tvec = p0 - v0
    u = np.einsum("ij,ij->i", tvec, pvec) * inv
    ok &= (u >= 0.0) & (u <= 1.0)
    qvec = np.cross(tvec, e1)
    v = (qvec @ d) * inv
    ok &= (v >= 0.0) & (u + v <= 1.0)
    t = np.einsum("ij,ij->i", e2, qvec) * inv
    ok &= (t >= 0.0) & (t <= 1.0)
    return bool(ok.any())


def collision_free(mesh: SceneMesh, p0, p1) -> bool:
    return not segment_hits_mesh(mesh, p0, p1)


# ------------------------------------------------------------------- file IO

_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def load_mesh(path) -> SceneMesh:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".ply":
        return _load_ply(path)
    if suffix == ".obj":
        return _load_obj(path)
    raise MeshError(f"unsupported mesh format {suffix!r} (expected .ply or .obj)")


def _load_ply(path: Path) -> SceneMesh:
    raw = path.read_bytes()
    try:
        header_end = raw.index(b"end_header\n") + len(b"end_header\n")
    except ValueError as e:
        raise MeshError(f"{path}: missing PLY header terminator") from e
    header = raw[:header_end].decode("ascii", errors="replace").splitlines()
    if not header or header[0].strip() != "ply":
        raise MeshError(f"{path}: not a PLY file")

    fmt = None
    elements: list[tuple[str, int, list]] = []  # name, count, [(prop, dtype/list-spec)]
    for line in header[1:]:
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise MeshError(f"{path}: property before element")
            if parts[1] == "list":
                elements[-1][2].append((parts[4], ("list", _PLY_TYPES[parts[2]], _PLY_TYPES[parts[3]])))
            else:
                elements[-1][2].append((parts[2], ("scalar", _PLY_TYPES[parts[1]])))
        elif parts[0] == "end_header":
            break
    if fmt not in ("ascii", "binary_little_endian"):
        raise MeshError(f"{path}: unsupported PLY format {fmt!r}")

    body = raw[header_end:]
    if fmt == "ascii":
        tokens = body.decode("ascii").split()
        pos = 0

        def take(n):
            nonlocal pos
            out = tokens[pos : pos + n]
            pos += n
            return out

    data: dict[str, dict[str, np.ndarray | list]] = {}
    offset = 0
    for name, count, props in elements:
        store: dict[str, list] = {p: [] for p, _ in props}
        if fmt == "ascii":
            for _ in range(count):
                for pname, spec in props:
                    if spec[0] == "scalar":
                        store[pname].append(float(take(1)[0]))
                    else:
                        n = int(take(1)[0])
                        store[pname].append([float(x) for x in take(n)])
        else:
            for _ in range(count):
                for pname, spec in props:
                    if spec[0] == "scalar":
                        dt = np.dtype("<" + spec[1])
                        store[pname].append(np.frombuffer(body, dtype=dt, count=1, offset=offset)[0])
                        offset += dt.itemsize
                    else:
                        cnt_dt = np.dtype("<" + spec[1])
                        n = int(np.frombuffer(body, dtype=cnt_dt, count=1, offset=offset)[0])
                        offset += cnt_dt.itemsize
                        item_dt = np.dtype("<" + spec[2])
                        vals = np.frombuffer(body, dtype=item_dt, count=n, offset=offset)
                        offset += n * item_dt.itemsize
                        store[pname].append(vals.tolist())
        data[name] = store

    if "vertex" not in data or "face" not in data:
        raise MeshError(f"{path}: PLY needs vertex and face elements")
    vtx = data["vertex"]
    try:
        vertices = np.stack([np.asarray(vtx[a], dtype=float) for a in ("x", "y", "z")], axis=1)
    except KeyError as e:
        raise MeshError(f"{path}: vertex element lacks {e}") from e
    normals = None
    if all(a in vtx for a in ("nx", "ny", "nz")):
        normals = np.stack([np.asarray(vtx[a], dtype=float) for a in ("nx", "ny", "nz")], axis=1)

    face_prop = next((p for p in ("vertex_indices", "vertex_index") if p in data["face"]), None)
    if face_prop is None:
        raise MeshError(f"{path}: face element lacks vertex indices")
    triangles = []
    for poly in data["face"][face_prop]:
        idx = [int(i) for i in poly]
        for k in range(1, len(idx) - 1):  # fan-triangulate polygons
            triangles.append((idx[0], idx[k], idx[k + 1]))
    return SceneMesh(vertices, np.asarray(triangles, dtype=np.int64).reshape(-1, 3), normals)


def _load_obj(path: Path) -> SceneMesh:
    vertices: list[list[float]] = []
    triangles: list[tuple[int, int, int]] = []
    try:
        text = path.read_text(encoding="utf-8", errors="replace")
    except OSError as e:
        raise MeshError(f"cannot read {path}: {e}") from e
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            vertices.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            idx = []
            for tok in parts[1:]:
                v = tok.split("/")[0]
                i = int(v)
                idx.append(i - 1 if i > 0 else len(vertices) + i)
            for k in range(1, len(idx) - 1):
                idx_tuple = (idx[0], idx[k], idx[k + 1])
                triangles.append(idx_tuple)
    if not vertices:
        raise MeshError(f"{path}: no vertices found")
    return SceneMesh(np.asarray(vertices, dtype=float), np.asarray(triangles, dtype=np.int64).reshape(-1, 3))


def save_ply(path, mesh: SceneMesh, binary: bool = False, with_normals: bool = False) -> None:
    path = Path(path)
    v = mesh.vertices.astype("<f4")
    n = mesh.normals.astype("<f4") if with_normals else None
    fmt = "binary_little_endian" if binary else "ascii"
    lines = ["ply", f"format {fmt} 1.0", f"element vertex {len(v)}"]
    lines += ["property float x", "property float y", "property float z"]
    if with_normals:
        lines += ["property float nx", "property float ny", "property float nz"]
    lines += [f"element face {len(mesh.triangles)}",
              "property list uchar int vertex_indices", "end_header"]
    header = ("\n".join(lines) + "\n").encode("ascii")
    if binary:
        out = bytearray(header)
        cols = np.hstack([v, n]) if with_normals else v
        out += cols.tobytes()
        for tri in mesh.triangles:
            out += struct.pack("<B3i", 3, *[int(i) for i in tri])
        path.write_bytes(bytes(out))
    else:
        body = []
        for i in range(len(v)):
            row = list(v[i]) + (list(n[i]) if with_normals else [])
            body.append(" ".join(f"{x:.9g}" for x in row))
        for tri in mesh.triangles:
            body.append("3 " + " ".join(str(int(i)) for i in tri))
        path.write_bytes(header + ("\n".join(body) + "\n").encode("ascii"))
