"""Image tagger interface, its two shipped backends, and the crop ensemble.

No recognition model is linked into this package: tags come either from
precomputed per-frame files or from an HTTP tagging service.
"""

from __future__ import annotations

import io
import json
from pathlib import Path
from typing import Protocol, runtime_checkable

import httpx
from PIL import Image

from ..store import normalize_tag


class TaggerError(Exception):
    """A tagger backend failed to produce tags for a frame."""


@runtime_checkable
class Tagger(Protocol):
    def tag_image(self, image: Image.Image, *, frame_id=None, crop_percent=None) -> list[tuple[str, float]]:
        """Tags with confidences for one image; deterministic within a session.

        ``frame_id``/``crop_percent`` identify the ensemble member for
        backends keyed by frame rather than by pixels.
        """
        ...


def _parse_tag_list(data) -> list[tuple[str, float]]:
    out = []
    for item in data:
        if isinstance(item, str):
            out.append((item, 1.0))
        elif isinstance(item, dict):
            conf = item.get("confidence", 1.0)
            out.append((str(item["tag"]), 1.0 if conf is None else float(conf)))
        else:
            tag, conf = item
            out.append((str(tag), 1.0 if conf is None else float(conf)))
    return out


def crop_suffix(crop_percent) -> str:
    return "" if not crop_percent else f"_crop{crop_percent:g}"


class FileTagger:
    """Reads precomputed tags: ``<frame_id>.json`` for the uncropped member
    and ``<frame_id>_crop<p>.json`` per crop percentage."""

    def __init__(self, tags_dir):
        self.tags_dir = Path(tags_dir)

    def tag_image(self, image, *, frame_id=None, crop_percent=None):
        if frame_id is None:
            raise TaggerError("file tagger requires a frame id")
        path = self.tags_dir / f"{frame_id}{crop_suffix(crop_percent)}.json"
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise TaggerError(f"missing tag file {path}") from e
        except json.JSONDecodeError as e:
            raise TaggerError(f"malformed tag file {path}: {e}") from e
        try:
            return _parse_tag_list(data)
        except (KeyError, TypeError, ValueError) as e:
            raise TaggerError(f"malformed tag file {path}: {e}") from e


class HttpTagger:
    """Posts PNG-encoded image bytes to a tagging service; expects a JSON
    array of {tag, confidence} back."""

    def __init__(self, url: str, timeout: float = 60.0, client: httpx.Client | None = None):
        self.url = url
        self._client = client or httpx.Client(timeout=timeout)

    def tag_image(self, image, *, frame_id=None, crop_percent=None):
        buf = io.BytesIO()
        image.save(buf, format="PNG")
        try:
            resp = self._client.post(
                self.url, content=buf.getvalue(), headers={"Content-Type": "image/png"}
            )
            resp.raise_for_status()
            data = resp.json()
        except httpx.HTTPError as e:
            raise TaggerError(f"tagging service failed: {e}") from e
        except json.JSONDecodeError as e:
            raise TaggerError(f"tagging service returned invalid JSON: {e}") from e
        try:
            return _parse_tag_list(data)
        except (KeyError, TypeError, ValueError) as e:
            raise TaggerError(f"tagging service returned a malformed tag list: {e}") from e


def center_crop(image: Image.Image, percent: float) -> Image.Image:
    """Remove ``percent`` of the width from each left/right border and of the
    height from each top/bottom border."""
    w, h = image.size
    dx = int(round(w * percent / 100.0))
    dy = int(round(h * percent / 100.0))
    if w - 2 * dx < 1 or h - 2 * dy < 1:
        raise ValueError(f"crop of {percent}% leaves an empty {w}x{h} image")
    return image.crop((dx, dy, w - dx, h - dy))


def crop_ensemble_tags(image: Image.Image, tagger: Tagger, crop_percentages=(5.0, 10.0),
                       frame_id=None) -> dict[str, float]:
    """Tags agreed on by the whole crop ensemble.

    Member 0 is the uncropped image, followed by one centered crop per
    percentage. Only tags present in every member survive, and a surviving
    tag's confidence is the minimum over the members.
    """
    members = [(None, image)] + [(p, center_crop(image, p)) for p in crop_percentages]
    agreed: dict[str, float] | None = None
    for percent, member in members:
        raw = tagger.tag_image(member, frame_id=frame_id, crop_percent=percent)
        tags: dict[str, float] = {}
        for tag, conf in raw:
            key = normalize_tag(tag)
            if key:
                tags[key] = max(float(conf), tags.get(key, 0.0))
        if agreed is None:
            agreed = tags
        else:
            agreed = {t: min(c, tags[t]) for t, c in agreed.items() if t in tags}
    return agreed or {}
