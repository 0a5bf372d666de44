"""Minimal OpenEXR scanline codec for float depth images.

Supports single-part scanline files with FLOAT/HALF/UINT channels and
NONE/ZIPS/ZIP compression, which covers depth renders in the wild. Tiled,
deep, and multi-part files are rejected.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

MAGIC = 20000630
COMPRESSION_NONE = 0
COMPRESSION_ZIPS = 2
COMPRESSION_ZIP = 3
_LINES_PER_CHUNK = {COMPRESSION_NONE: 1, COMPRESSION_ZIPS: 1, COMPRESSION_ZIP: 16}

_PIXEL_DTYPES = {0: np.dtype("<u4"), 1: np.dtype("<f2"), 2: np.dtype("<f4")}
_PIXEL_CODES = {np.dtype("uint32"): 0, np.dtype("float16"): 1, np.dtype("float32"): 2}


class ExrError(ValueError):
    """Malformed or unsupported EXR file."""


# ---------------------------------------------------------------------- read


def _cstr(data: bytes, off: int) -> tuple[str, int]:
    end = data.index(b"\x00", off)
    return data[off:end].decode("ascii"), end + 1


def _parse_channels(blob: bytes) -> list[tuple[str, np.dtype]]:
    channels = []
    off = 0
    while blob[off] != 0:
        name, off = _cstr(blob, off)
        ptype, _plinear, xs, ys = struct.unpack_from("<iB3xii", blob, off)
        off += 16
        if ptype not in _PIXEL_DTYPES:
            raise ExrError(f"unknown pixel type {ptype} for channel {name!r}")
        if xs != 1 or ys != 1:
            raise ExrError("subsampled channels are not supported")
        channels.append((name, _PIXEL_DTYPES[ptype]))
    return channels


def read_exr(path) -> dict[str, np.ndarray]:
    """Read all channels of a scanline EXR into (H, W) arrays."""
    data = Path(path).read_bytes()
    if len(data) < 8 or struct.unpack_from("<i", data, 0)[0] != MAGIC:
        raise ExrError(f"{path}: not an EXR file")
    version = struct.unpack_from("<i", data, 4)[0]
    if version & 0xFF != 2:
        raise ExrError(f"{path}: unsupported EXR version {version & 0xFF}")
    if version & 0x200:
        raise ExrError(f"{path}: tiled EXR is not supported")
    if version & (0x800 | 0x1000):
        raise ExrError(f"{path}: deep/multi-part EXR is not supported")

    off = 8
    attrs: dict[str, bytes] = {}
    while data[off] != 0:
        name, off = _cstr(data, off)
        _type, off = _cstr(data, off)
        size = struct.unpack_from("<i", data, off)[0]
        off += 4
        attrs[name] = data[off : off + size]
        off += size
    off += 1  # header terminator

    try:
        channels = _parse_channels(attrs["channels"])
        compression = attrs["compression"][0]
        x_min, y_min, x_max, y_max = struct.unpack("<4i", attrs["dataWindow"])
    except KeyError as e:
        raise ExrError(f"{path}: missing required attribute {e}") from e
    if compression not in _LINES_PER_CHUNK:
        raise ExrError(f"{path}: compression code {compression} is not supported")
    width = x_max - x_min + 1
    height = y_max - y_min + 1
    if width <= 0 or height <= 0:
        raise ExrError(f"{path}: empty data window")

    per_chunk = _LINES_PER_CHUNK[compression]
    n_chunks = (height + per_chunk - 1) // per_chunk
    table = struct.unpack_from(f"<{n_chunks}Q", data, off)

    bytes_per_px = sum(dt.itemsize for _, dt in channels)
    out = {name: np.empty((height, width), dtype=dt) for name, dt in channels}
    for chunk_off in table:
        y, size = struct.unpack_from("<ii", data, chunk_off)
        chunk = data[chunk_off + 8 : chunk_off + 8 + size]
        row0 = y - y_min
        nlines = min(per_chunk, height - row0)
        raw_size = nlines * width * bytes_per_px
        if compression == COMPRESSION_NONE or size == raw_size:
            raw = chunk
        else:
            raw = _zip_decode(chunk, raw_size)
        if len(raw) != raw_size:
            raise ExrError(f"{path}: chunk at y={y} has {len(raw)} bytes, expected {raw_size}")
        pos = 0
        for line in range(nlines):
            for name, dt in channels:
                n = width * dt.itemsize
                out[name][row0 + line] = np.frombuffer(raw, dtype=dt, count=width, offset=pos)
                pos += n
    return out


def read_depth_exr(path, channel: str | None = None) -> np.ndarray:
    """Read one depth channel as float32 meters. Prefers Z, then Y/depth/R."""
    channels = read_exr(path)
    if channel is None:
        for cand in ("Z", "Y", "depth", "D", "R"):
            if cand in channels:
                channel = cand
                break
        else:
            if len(channels) != 1:
                raise ExrError(f"{path}: ambiguous channels {sorted(channels)}")
            channel = next(iter(channels))
    if channel not in channels:
        raise ExrError(f"{path}: no channel {channel!r} (has {sorted(channels)})")
    return channels[channel].astype(np.float32)


# --------------------------------------------------------------------- write


def write_exr(path, channels: dict[str, np.ndarray], compression: str = "zip") -> None:
    """Write (H, W) arrays as a scanline EXR; channels stored alphabetically."""
    comp = {"none": COMPRESSION_NONE, "zips": COMPRESSION_ZIPS, "zip": COMPRESSION_ZIP}.get(compression)
    if comp is None:
        raise ValueError(f"unsupported compression {compression!r}")
    if not channels:
        raise ValueError("need at least one channel")
    names = sorted(channels)
    arrays = []
    shape = None
    for name in names:
        a = np.ascontiguousarray(channels[name])
        if a.dtype not in _PIXEL_CODES:
            raise ValueError(f"channel {name!r}: dtype {a.dtype} not representable in EXR")
        if a.ndim != 2 or (shape is not None and a.shape != shape):
            raise ValueError("all channels must be 2D arrays of identical shape")
        shape = a.shape
        arrays.append(a)
    height, width = shape

    chlist = b""
    for name, a in zip(names, arrays):
        chlist += name.encode("ascii") + b"\x00"
        chlist += struct.pack("<iB3xii", _PIXEL_CODES[a.dtype], 0, 1, 1)
    chlist += b"\x00"
    box = struct.pack("<4i", 0, 0, width - 1, height - 1)

    def attr(name: str, typ: str, payload: bytes) -> bytes:
        return name.encode() + b"\x00" + typ.encode() + b"\x00" + struct.pack("<i", len(payload)) + payload

    header = b"".join(
        [
            struct.pack("<ii", MAGIC, 2),
            attr("channels", "chlist", chlist),
            attr("compression", "compression", bytes([comp])),
            attr("dataWindow", "box2i", box),
            attr("displayWindow", "box2i", box),
            attr("lineOrder", "lineOrder", b"\x00"),
            attr("pixelAspectRatio", "float", struct.pack("<f", 1.0)),
            attr("screenWindowCenter", "v2f", struct.pack("<2f", 0.0, 0.0)),
            attr("screenWindowWidth", "float", struct.pack("<f", 1.0)),
            b"\x00",
        ]
    )

    per_chunk = _LINES_PER_CHUNK[comp]
    chunks = []
    for row0 in range(0, height, per_chunk):
        nlines = min(per_chunk, height - row0)
        raw = b"".join(
            arrays[c][row0 + line].tobytes() for line in range(nlines) for c in range(len(arrays))
        )
        if comp == COMPRESSION_NONE:
            payload = raw
        else:
            packed = _zip_encode(raw)
            payload = packed if len(packed) < len(raw) else raw
        chunks.append((row0, payload))

    out = bytearray(header)
    table_pos = len(out)
    out += b"\x00" * (8 * len(chunks))
    offsets = []
    for row0, payload in chunks:
        offsets.append(len(out))
        out += struct.pack("<ii", row0, len(payload))
        out += payload
    for i, o in enumerate(offsets):
        struct.pack_into("<Q", out, table_pos + 8 * i, o)
    Path(path).write_bytes(bytes(out))


# --------------------------------------------------- zip predictor+interleave


def _zip_decode(chunk: bytes, expected: int) -> bytes:
    buf = np.frombuffer(zlib.decompress(chunk), dtype=np.uint8).astype(np.int64)
    if len(buf) != expected:
        raise ExrError(f"decompressed chunk has {len(buf)} bytes, expected {expected}")
    # undo delta predictor: b[i] = b[i-1] + b[i] - 128
    buf[1:] -= 128
    buf = np.cumsum(buf) & 0xFF
    # undo interleave: first half -> even positions, second half -> odd
    half = (len(buf) + 1) // 2
    out = np.empty(len(buf), dtype=np.uint8)
    out[0::2] = buf[:half]
    out[1::2] = buf[half:]
    return out.tobytes()


def _zip_encode(raw: bytes) -> bytes:
    data = np.frombuffer(raw, dtype=np.uint8)
    tmp = np.concatenate([data[0::2], data[1::2]]).astype(np.int64)
    # delta predictor: t[i] = t[i] - t[i-1] + 384 (mod 256)
    tmp[1:] = (tmp[1:] - tmp[:-1] + 384) & 0xFF
    return zlib.compress(tmp.astype(np.uint8).tobytes())
