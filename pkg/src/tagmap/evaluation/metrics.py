"""Path-length localization metrics: P2E, E2P, and precision/recall reports.

P2E is the expected shortest-path length from a proposal's nodes to the
nearest entity instance; E2P is the symmetric quantity from an entity to the
nearest proposal. Together they are the two directed average Hausdorff
distances over the grid graph. Precision@t is the fraction of proposals with
P2E <= t, Recall@t the fraction of instances with E2P <= t, macro-averaged
across classes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..localization import Proposal
from .assign import assign_nodes_object, assign_nodes_proposal, assign_nodes_region
from .gridgraph import GridGraph
from .labels import KINDS, LabeledEntity
from .mesh import SceneMesh

log = logging.getLogger(__name__)

DEFAULT_OBJECT_THRESHOLDS = (0.1, 0.5, 1.0, 2.0)
DEFAULT_REGION_THRESHOLDS = (0.5, 1.0, 2.0, 3.0)


def _as_index_sets(node_sets) -> list[np.ndarray]:
    return [np.unique(np.asarray(s, dtype=int)) for s in node_sets]


def p2e(graph: GridGraph, proposal_nodes, entity_node_sets) -> float:
    """Mean over proposal nodes of the shortest-path distance to the nearest
    node of any entity instance; +inf when some proposal node reaches none."""
    p_nodes = np.unique(np.asarray(proposal_nodes, dtype=int))
    sets = [s for s in _as_index_sets(entity_node_sets) if s.size]
    if p_nodes.size == 0 or not sets:
        raise ValueError("p2e needs non-empty proposal nodes and at least one entity node set")
    dist = graph.min_dist_from(np.concatenate(sets))
    return float(np.mean(dist[p_nodes]))


def e2p(graph: GridGraph, entity_nodes, proposal_node_sets) -> float:
    """Mean over entity nodes of the shortest-path distance to the nearest
    node of any proposal; symmetric counterpart of p2e."""
    e_nodes = np.unique(np.asarray(entity_nodes, dtype=int))
    sets = [s for s in _as_index_sets(proposal_node_sets) if s.size]
    if e_nodes.size == 0 or not sets:
        raise ValueError("e2p needs non-empty entity nodes and at least one proposal node set")
    dist = graph.min_dist_from(np.concatenate(sets))
    return float(np.mean(dist[e_nodes]))


@dataclass
class ClassResult:
    name: str
    kind: str
    thresholds: tuple[float, ...]
    n_proposals: int = 0
    n_proposals_skipped: int = 0  # no assignable nodes
    n_instances: int = 0
    n_instances_skipped: int = 0
    p2e_values: list[float] = field(default_factory=list)  # per counted proposal
    e2p_values: list[float] = field(default_factory=list)  # per counted instance

    def precision(self, t: float) -> float | None:
        if not self.p2e_values:
            return None
        return sum(v <= t for v in self.p2e_values) / len(self.p2e_values)

    def recall(self, t: float) -> float | None:
        if not self.e2p_values:
            return None
        return sum(v <= t for v in self.e2p_values) / len(self.e2p_values)

    def n_relevant(self, t: float) -> int:
        return sum(v <= t for v in self.p2e_values)

    def n_recalled(self, t: float) -> int:
        return sum(v <= t for v in self.e2p_values)

    def to_dict(self) -> dict:
        return {
            "class": self.name,
            "kind": self.kind,
            "thresholds": list(self.thresholds),
            "n_proposals": self.n_proposals,
            "n_proposals_skipped": self.n_proposals_skipped,
            "n_instances": self.n_instances,
            "n_instances_skipped": self.n_instances_skipped,
            "precision": {str(t): self.precision(t) for t in self.thresholds},
            "recall": {str(t): self.recall(t) for t in self.thresholds},
            "p2e": [None if np.isinf(v) else v for v in self.p2e_values],
            "e2p": [None if np.isinf(v) else v for v in self.e2p_values],
        }


@dataclass
class EvalReport:
    object_thresholds: tuple[float, ...]
    region_thresholds: tuple[float, ...]
    classes: list[ClassResult]
    unmapped_label_classes: list[str] = field(default_factory=list)
    mapping_classes_without_labels: list[str] = field(default_factory=list)

    def thresholds_for(self, kind: str) -> tuple[float, ...]:
        return self.object_thresholds if kind == "object" else self.region_thresholds

    def macro(self, kind: str, metric: str, t: float) -> float | None:
        values = []
        for c in self.classes:
            if c.kind != kind:
                continue
            v = c.precision(t) if metric == "precision" else c.recall(t)
            if v is not None:
                values.append(v)
        return float(np.mean(values)) if values else None

    def to_dict(self) -> dict:
        out = {
            "object_thresholds": list(self.object_thresholds),
            "region_thresholds": list(self.region_thresholds),
            "classes": [c.to_dict() for c in sorted(self.classes, key=lambda c: (c.kind, c.name))],
            "macro": {},
            "unmapped_label_classes": sorted(self.unmapped_label_classes),
            "mapping_classes_without_labels": sorted(self.mapping_classes_without_labels),
        }
        for kind in KINDS:
            if not any(c.kind == kind for c in self.classes):
                continue
            ts = self.thresholds_for(kind)
            out["macro"][kind] = {
                "precision": {str(t): self.macro(kind, "precision", t) for t in ts},
                "recall": {str(t): self.macro(kind, "recall", t) for t in ts},
            }
        return out

    def to_csv_text(self) -> str:
        all_ts = sorted(set(self.object_thresholds) | set(self.region_thresholds))
        cols = ["kind", "class", "n_proposals", "n_proposals_skipped", "n_instances",
                "n_instances_skipped"]
        cols += [f"precision@{t:g}" for t in all_ts] + [f"recall@{t:g}" for t in all_ts]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)

        def fmt(v):
            return "" if v is None else f"{v:.6f}"

        for c in sorted(self.classes, key=lambda c: (c.kind, c.name)):
            ts = set(c.thresholds)
            row = [c.kind, c.name, c.n_proposals, c.n_proposals_skipped,
                   c.n_instances, c.n_instances_skipped]
            row += [fmt(c.precision(t)) if t in ts else "" for t in all_ts]
            row += [fmt(c.recall(t)) if t in ts else "" for t in all_ts]
            w.writerow(row)
        for kind in KINDS:
            if not any(c.kind == kind for c in self.classes):
                continue
            ts = set(self.thresholds_for(kind))
            row = [kind, "__macro__", "", "", "", ""]
            row += [fmt(self.macro(kind, "precision", t)) if t in ts else "" for t in all_ts]
            row += [fmt(self.macro(kind, "recall", t)) if t in ts else "" for t in all_ts]
            w.writerow(row)
        return buf.getvalue()

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv_text(), encoding="utf-8")


def _evaluate_class(graph: GridGraph, mesh: SceneMesh, name: str, kind: str,
                    proposals: list[Proposal], instances: list[LabeledEntity],
                    thresholds: tuple[float, ...], proposal_inflation: float | None,
                    object_inflation: float) -> ClassResult:
    result = ClassResult(name=name, kind=kind, thresholds=thresholds,
                         n_proposals=len(proposals), n_instances=len(instances))

    entity_sets = []
    for inst in instances:
        lo, hi = inst.box
        if kind == "object":
            nodes = assign_nodes_object(graph, lo, hi, mesh, delta=object_inflation)
        else:
            nodes = assign_nodes_region(graph, lo, hi)
        if nodes.size == 0:
            result.n_instances_skipped += 1
            entity_sets.append(None)
        else:
            entity_sets.append(nodes)
    usable_entity_sets = [s for s in entity_sets if s is not None]

    proposal_sets = []
    for prop in proposals:
        nodes = assign_nodes_proposal(graph, prop.aabb_min, prop.aabb_max, mesh,
                                      delta=proposal_inflation)
        if nodes.size == 0:
            result.n_proposals_skipped += 1
            proposal_sets.append(None)
        else:
            proposal_sets.append(nodes)
    usable_proposal_sets = [s for s in proposal_sets if s is not None]

    # One multi-source sweep per direction covers every P2E / E2P in the class.
    if usable_entity_sets:
        dist_from_entities = graph.min_dist_from(np.concatenate(usable_entity_sets))
        for nodes in proposal_sets:
            if nodes is not None:
                result.p2e_values.append(float(np.mean(dist_from_entities[nodes])))
    if usable_proposal_sets:
        dist_from_proposals = graph.min_dist_from(np.concatenate(usable_proposal_sets))
    else:
        dist_from_proposals = np.full(graph.n_nodes, np.inf)
    for nodes in entity_sets:
        if nodes is not None:
            result.e2p_values.append(float(np.mean(dist_from_proposals[nodes])))
    return result


def precision_recall_report(
    graph: GridGraph,
    mesh: SceneMesh,
    localizations: dict[str, list[Proposal]],
    labels: list[LabeledEntity],
    mapping: dict[str, list[str]],
    object_thresholds: tuple[float, ...] = DEFAULT_OBJECT_THRESHOLDS,
    region_thresholds: tuple[float, ...] = DEFAULT_REGION_THRESHOLDS,
    proposal_inflation: float | None = None,
    object_inflation: float = 1.0,
    jobs: int | None = None,
) -> EvalReport:
    """Per-class and macro precision/recall at distance thresholds.

    Proposals are pooled over a class's mapped tags. Proposals or instances
    with no assignable grid nodes are skipped and excluded from denominators;
    a class with zero countable proposals reports undefined precision while
    its recall is still computed (every instance misses).
    """
    by_class: dict[tuple[str, str], list[LabeledEntity]] = {}
    for ent in labels:
        by_class.setdefault((ent.kind, ent.class_name), []).append(ent)

    label_classes = {name for _, name in by_class}
    unmapped = sorted(name for kind, name in by_class if name not in mapping)
    for name in unmapped:
        log.warning("label class %r has no tag mapping; skipped", name)
    extra = sorted(set(mapping) - label_classes)

    tasks = []
    for (kind, name), instances in sorted(by_class.items()):
        if name not in mapping:
            continue
        proposals = [p for tag in mapping[name] for p in localizations.get(tag, [])]
        thresholds = tuple(object_thresholds if kind == "object" else region_thresholds)
        tasks.append((name, kind, proposals, instances, thresholds))

    def run(task):
        name, kind, proposals, instances, thresholds = task
        return _evaluate_class(graph, mesh, name, kind, proposals, instances, thresholds,
                               proposal_inflation, object_inflation)

    if jobs and jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            classes = list(pool.map(run, tasks))
    else:
        classes = [run(t) for t in tasks]

    return EvalReport(
        object_thresholds=tuple(object_thresholds),
        region_thresholds=tuple(region_thresholds),
        classes=classes,
        unmapped_label_classes=unmapped,
        mapping_classes_without_labels=extra,
    )
