"""Grid-graph evaluation of coarse localizations: P2E/E2P and P/R reports."""

from .assign import assign_nodes_object, assign_nodes_proposal, assign_nodes_region
from .gridgraph import GridGraph, GridGraphError, build_grid_graph, inside_scene
from .labels import LabeledEntity, LabelsError, load_labels
from .mappings import (
    OBJECT_CLASS_TAGS,
    REGION_CLASS_TAGS,
    MappingError,
    default_mapping,
    load_mapping,
)
from .mesh import MeshError, SceneMesh, collision_free, load_mesh, save_ply, segment_hits_mesh
from .metrics import ClassResult, EvalReport, e2p, p2e, precision_recall_report

__all__ = [
    "assign_nodes_object",
    "assign_nodes_proposal",
    "assign_nodes_region",
    "GridGraph",
    "GridGraphError",
    "build_grid_graph",
    "inside_scene",
    "LabeledEntity",
    "LabelsError",
    "load_labels",
    "OBJECT_CLASS_TAGS",
    "REGION_CLASS_TAGS",
    "MappingError",
    "default_mapping",
    "load_mapping",
    "MeshError",
    "SceneMesh",
    "collision_free",
    "load_mesh",
    "save_ply",
    "segment_hits_mesh",
    "ClassResult",
    "EvalReport",
    "e2p",
    "p2e",
    "precision_recall_report",
]
