"""Map construction from posed RGB-D frames and an image tagger."""

from .build import BuildSummary, build_map
from .dataset import DatasetError, Frame, load_color, load_depth, load_manifest
from .depth import DepthStats, NoValidDepthError, compute_depth_stats, depth_filter, valid_depth_mask
from .taggers import FileTagger, HttpTagger, Tagger, TaggerError, center_crop, crop_ensemble_tags

__all__ = [
    "BuildSummary",
    "build_map",
    "DatasetError",
    "Frame",
    "load_color",
    "load_depth",
    "load_manifest",
    "DepthStats",
    "NoValidDepthError",
    "compute_depth_stats",
    "depth_filter",
    "valid_depth_mask",
    "FileTagger",
    "HttpTagger",
    "Tagger",
    "TaggerError",
    "center_crop",
    "crop_ensemble_tags",
]
