"""tagmap: a text-based scene map for coarse 3D localization and LLM grounding.

The map relates text tags recognized in posed RGB-D frames to the viewpoints
they were seen from; tags are localized in 3D by frustum voting, evaluated
with shortest-path precision/recall metrics, and served to a tool-calling
chat assistant.
"""

__version__ = "0.1.0"

from .params import ConstructionParams, EvaluationParams, LocalizationParams
from .store import (
    DuplicateViewpointError,
    Intrinsics,
    TagEntry,
    TagMap,
    TagMapError,
    TagMapFormatError,
    TagMapVersionError,
    Viewpoint,
    normalize_tag,
)
from .localization import (
    Frustum,
    FrustumError,
    Level,
    Proposal,
    VoxelGrid,
    dbscan,
    extract_levels,
    localize_tag,
    make_frustum,
    nms,
    vote,
)

__all__ = [
    "__version__",
    "ConstructionParams",
    "EvaluationParams",
    "LocalizationParams",
    "DuplicateViewpointError",
    "Intrinsics",
    "TagEntry",
    "TagMap",
    "TagMapError",
    "TagMapFormatError",
    "TagMapVersionError",
    "Viewpoint",
    "normalize_tag",
    "Frustum",
    "FrustumError",
    "Level",
    "Proposal",
    "VoxelGrid",
    "dbscan",
    "extract_levels",
    "localize_tag",
    "make_frustum",
    "nms",
    "vote",
]
