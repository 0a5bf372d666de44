"""Shipped class-to-tag mappings for the Matterport3D evaluation protocol.

Every evaluation class maps to the recognizer-vocabulary tags whose proposals
are pooled for that class. Custom mappings load from a flat JSON object
``{class: [tags]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..store import normalize_tag

OBJECT_CLASS_TAGS: dict[str, list[str]] = {
    "bathtub": ["bath", "jacuzzi"],
    "bed": [
        "bed", "bed frame", "bunk bed", "canopy bed", "cat bed", "dog bed", "futon",
        "hammock", "headboard", "hospital bed", "infant bed", "mattress",
    ],
    "cabinet": [
        "armoire", "bathroom cabinet", "cabinet", "cabinetry", "closet", "file cabinet",
        "kitchen cabinet", "medicine cabinet", "side cabinet", "tv cabinet", "wine cabinet",
    ],
    "chair": [
        "armchair", "beach chair", "bean bag chair", "beanbag", "chair", "computer chair",
        "feeding chair", "folding chair", "office chair", "rocking chair", "swivel chair",
        "throne",
    ],
    "chest_of_drawers": ["bureau", "drawer", "dresser", "nightstand"],
    "clothes": [
        "baby clothe", "baseball hat", "bathrobe", "bathroom accessory", "bikini",
        "bikini top", "blouse", "christmas hat", "cloak", "clothing", "coat",
        "cocktail dress", "corset", "costume", "cowboy hat", "crop top", "denim jacket",
        "dress", "dress hat", "dress shirt", "dress shoe", "dress suit", "evening dress",
        "fur coat", "gown", "halter top", "hat", "headdress", "headscarf", "hoodie",
        "jacket", "jeans", "jockey cap", "kilt", "kimono", "lab coat", "lace dress",
        "laundry", "leather jacket", "maxi dress", "miniskirt", "overcoat", "pants",
        "pantyhose", "polo neck", "polo shirt", "raincoat", "robe", "safety vest",
        "scarf", "shirt", "ski jacket", "sports coat", "straw hat", "sun hat",
        "suspenders", "sweat pant", "sweater", "sweatshirt", "t shirt", "t-shirt",
        "trench coat", "underclothes", "vest", "visor", "waterproof jacket",
        "wedding dress", "wrap dress",
    ],
    "counter": [
        "bar", "buffet", "counter", "counter top", "island", "kitchen counter",
        "kitchen island", "wet bar",
    ],
    "cushion": ["pillow", "throw pillow"],
    "fireplace": ["fireplace", "mantle"],
    "gym_equipment": [
        "barbell", "dumbbell", "stationary bicycle", "training bench", "treadmill", "weight",
    ],
    "picture": [
        "art", "art print", "couple photo", "decorative picture", "drawing", "family photo",
        "group photo", "movie poster", "oil painting", "photo", "photo frame", "picture",
        "picture frame", "portrait", "poster", "publicity portrait", "reflection",
        "wedding photo",
    ],
    "plant": ["bush", "flower", "grass", "houseplant", "plant", "tree"],
    "seating": ["bench", "church bench", "park bench", "seat", "window seat"],
    "shower": ["shower", "shower door", "shower head"],
    "sink": ["basin", "bathroom sink", "sink"],
    "sofa": ["couch", "loveseat"],
    "stool": ["bar stool", "footrest", "music stool", "step stool", "stool"],
    "table": [
        "altar", "billiard table", "changing table", "cocktail table", "computer desk",
        "dinning table", "foosball", "glass table", "kitchen table", "office desk",
        "picnic table", "poker table", "round table", "side table", "stand", "table",
        "vanity", "workbench", "writing desk",
    ],
    "toilet": ["bidet", "toilet bowl", "toilet seat"],
    "towel": ["bath towel", "beach towel", "face towel", "hand towel", "paper towel", "towel"],
    "tv_monitor": [
        "bulletin board", "computer monitor", "computer screen", "display", "monitor",
        "television", "whiteboard",
    ],
}

REGION_CLASS_TAGS: dict[str, list[str]] = {
    "balcony": ["balcony"],
    "bar": ["bar"],
    "bathroom": ["bathroom"],
    "bedroom": ["bedroom"],
    "classroom": ["classroom"],
    "closet": ["closet"],
    "dining room": ["dining room"],
    "garage": ["garage"],
    "hallway": ["hallway"],
    "kitchen": ["kitchen"],
    "laundryroom/mudroom": ["laundry room"],
    "library": ["library"],
    "living room": ["living room"],
    "meetingroom/conferenceroom": ["meeting room"],
    "office": ["home office", "office"],
    "porch/terrace/deck/driveway": ["deck", "driveway", "porch", "terrace"],
    "rec/game": ["recreation room"],
    "spa/sauna": ["sauna"],
    "stairs": ["stairs", "stairwell"],
    "tv": ["cinema", "home theater", "theater"],
    "utilityroom/toolroom": ["utility room"],
    "workout/gym/exercise": ["gym"],
}


class MappingError(Exception):
    pass


def default_mapping() -> dict[str, list[str]]:
    """Flat {class: [tags]} over both object and region classes."""
    merged: dict[str, list[str]] = {}
    merged.update({k: list(v) for k, v in OBJECT_CLASS_TAGS.items()})
    merged.update({k: list(v) for k, v in REGION_CLASS_TAGS.items()})
    return merged


def validate_mapping(mapping: dict) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for cls, tags in mapping.items():
        if not isinstance(tags, (list, tuple)) or not tags:
            raise MappingError(f"class {cls!r} must map to a non-empty tag list")
        out[str(cls).strip().lower()] = [normalize_tag(t) for t in tags]
    return out


def load_mapping(path) -> dict[str, list[str]]:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise MappingError(f"cannot read mapping file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise MappingError(f"mapping file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise MappingError(f"mapping file {path} must be a JSON object of class -> [tags]")
    return validate_mapping(data)
