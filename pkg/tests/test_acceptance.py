"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each test ends by printing one `ACCEPTANCE <criterion>: PASS` line (visible
with `pytest -s`/`-v`); a failed criterion fails its test before the line is
printed.
"""

from __future__ import annotations

import json
import time

import numpy as np
import pytest

from tagmap.cli import main
from tagmap.evaluation import (
    build_grid_graph,
    collision_free,
    inside_scene,
    load_labels,
    precision_recall_report,
)
from tagmap.evaluation.assign import assign_nodes_object, assign_nodes_proposal
from tagmap.grounding import ChatSession, ScriptedMockProvider, ToolExecutor, chat_turn
from tagmap.localization import VoxelGrid, dbscan, extract_levels, localize_tag, make_frustum, nms, vote
from tagmap.params import LocalizationParams
from tagmap.store import Intrinsics, TagMap, Viewpoint

from .conftest import box_shell_mesh, make_pose
from .oracles import (
    brute_force_votes,
    naive_dbscan,
    naive_nms,
    p2e_oracle,
    partitions_equal,
)
from .test_localization import box as make_box
from .test_localization import random_viewpoint


def test_voting_oracle():
    """>= 50 randomized scenes (<= 20 frustums, grid <= 50^3): every voxel's
    vote equals brute-force point-in-frustum counting; exact; < 10 s total."""
    rng = np.random.default_rng(101)
    start = time.monotonic()
    for scene in range(50):
        n = int(rng.integers(1, 21))
        vps = [random_viewpoint(rng, i) for i in range(n)]
        frustums = [make_frustum(v, 0.2) for v in vps]
        lo = np.min([f.aabb_min for f in frustums], axis=0)
        hi = np.max([f.aabb_max for f in frustums], axis=0)
        # grid capped at 50 voxels per axis
        voxel = max(0.25, float((hi - lo).max()) / 49.0)
        grid = vote(frustums, voxel)
        assert max(grid.dims) <= 50
        expect = brute_force_votes(vps, 0.2, grid)
        assert np.array_equal(grid.votes, expect), f"scene {scene} vote mismatch"
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"voting oracle took {elapsed:.1f} s"
    print(f"\nACCEPTANCE voting_oracle: PASS ({elapsed:.1f} s)")


def test_dbscan_equivalence():
    """100 random point sets (n <= 500), eps 0.4, minPts 5: partitions equal
    the naive O(n^2) reference up to relabeling; exact; < 10 s."""
    rng = np.random.default_rng(102)
    start = time.monotonic()
    for trial in range(100):
        n = int(rng.integers(1, 501))
        scale = float(rng.uniform(0.5, 4.0))
        pts = rng.uniform(0, scale, size=(n, 3))
        got = dbscan(pts, eps=0.4, min_points=5)
        expect = naive_dbscan(pts, eps=0.4, min_points=5)
        assert partitions_equal(got, expect), f"trial {trial} partition mismatch"
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"dbscan equivalence took {elapsed:.1f} s"
    print(f"\nACCEPTANCE dbscan_equivalence: PASS ({elapsed:.1f} s)")


def test_nms_soundness():
    """Random nested box sets (n <= 20): output equals the O(n^2) oracle and
    no surviving pair violates the containment rule; exact."""
    rng = np.random.default_rng(103)
    for trial in range(200):
        n = int(rng.integers(1, 21))
        proposals = []
        for _ in range(n):
            if proposals and rng.random() < 0.6:
                parent = proposals[int(rng.integers(0, len(proposals)))]
                span = parent.aabb_max - parent.aabb_min
                lo = parent.aabb_min + rng.uniform(0, 0.45, 3) * span
                hi = parent.aabb_max - rng.uniform(0, 0.45, 3) * span
                lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
            else:
                lo = rng.uniform(-6, 5, 3)
                hi = lo + rng.uniform(0.05, 4.0, 3)
            proposals.append(make_box(lo, hi, level=int(rng.integers(1, 7))))
        got = nms(proposals)
        expect = naive_nms(proposals)
        assert {p.key() for p in got} == {p.key() for p in expect}, f"trial {trial}"
        for p in got:
            for q in got:
                if q.confidence_level > p.confidence_level:
                    assert not (
                        np.all(q.aabb_min >= p.aabb_min - 1e-6)
                        and np.all(q.aabb_max <= p.aabb_max + 1e-6)
                    ), f"trial {trial}: surviving pair violates the rule"
    print("\nACCEPTANCE nms_soundness: PASS")


def test_level_monotonicity(apartment):
    """Voxel sets at successive vote thresholds are nested, and the report's
    precision/recall curves are non-decreasing in the threshold; exact."""
    rng = np.random.default_rng(104)
    for _ in range(25):
        votes = rng.integers(0, int(rng.integers(2, 12)), size=(8, 7, 6)).astype(np.int32)
        grid = VoxelGrid(origin=np.zeros(3), voxel_size=0.2, dims=votes.shape, votes=votes)
        levels = extract_levels(grid, (0.0, 0.25, 0.5, 0.75))
        prev = None
        for lv in levels:
            current = {tuple(p) for p in np.round(lv.points / 0.2 - 0.5).astype(int)}
            if prev is not None:
                assert current <= prev, "level sets not nested"
            prev = current

    graph = build_grid_graph(apartment["mesh"], resolution=0.5)
    mapping = apartment["mapping"]
    tag_map = apartment["map"]
    localizations = {t: localize_tag(tag_map, t) for ts in mapping.values() for t in ts
                     if t in tag_map}
    labels = load_labels(apartment["labels_path"])
    report = precision_recall_report(graph, apartment["mesh"], localizations, labels, mapping)
    for c in report.classes:
        ts = sorted(c.thresholds)
        precs = [c.precision(t) for t in ts if c.precision(t) is not None]
        recs = [c.recall(t) for t in ts if c.recall(t) is not None]
        assert precs == sorted(precs), f"{c.name}: precision not monotone"
        assert recs == sorted(recs), f"{c.name}: recall not monotone"
    print("\nACCEPTANCE level_monotonicity: PASS")


def test_p2e_e2p_oracle():
    """100 random graphs (<= 200 nodes): P2E/E2P match a repeated
    single-source shortest-path oracle within 1e-9; unreachable cases are
    consistently +inf."""
    from tagmap.evaluation import GridGraph, e2p, p2e

    rng = np.random.default_rng(105)
    saw_unreachable = 0
    for trial in range(100):
        n = int(rng.integers(4, 201))
        nodes = rng.uniform(0, 20, size=(n, 3))
        # sparse graphs leave some components disconnected
        m = int(rng.integers(max(1, n // 2), 2 * n))
        pairs = set()
        while len(pairs) < m:
            a, b = rng.integers(0, n, size=2)
            if a != b:
                pairs.add((min(a, b), max(a, b)))
        edges = np.array(sorted(pairs))
        g = GridGraph(nodes=nodes, edges=edges, resolution=1.0)
        weighted = [(int(a), int(b), float(np.linalg.norm(nodes[a] - nodes[b])))
                    for a, b in edges]
        p_nodes = rng.choice(n, size=int(rng.integers(1, 6)), replace=False)
        e_sets = [rng.choice(n, size=int(rng.integers(1, 5)), replace=False).tolist()
                  for _ in range(int(rng.integers(1, 4)))]
        got_p = p2e(g, p_nodes, e_sets)
        expect_p = p2e_oracle(n, weighted, p_nodes, e_sets)
        got_e = e2p(g, p_nodes, e_sets)
        if np.isinf(expect_p):
            saw_unreachable += 1
            assert np.isinf(got_p)
        else:
            assert got_p == pytest.approx(expect_p, abs=1e-9)
        expect_e = p2e_oracle(n, weighted, p_nodes, e_sets)
        if np.isinf(expect_e):
            assert np.isinf(got_e)
        else:
            assert got_e == pytest.approx(expect_e, abs=1e-9)
    assert saw_unreachable > 0, "fixture never exercised the unreachable case"
    print(f"\nACCEPTANCE p2e_e2p_oracle: PASS ({saw_unreachable} unreachable cases)")


def test_gridgraph_transcription():
    """Synthetic 2x2x2 m box scene at 0.5 m resolution: nodes and edges equal
    brute-force application of the construction predicates; exact."""
    v, t = box_shell_mesh((0, 0, 0), (2, 2, 2), pitch=0.25)
    from tagmap.evaluation import SceneMesh

    mesh = SceneMesh(v, t)
    graph = build_grid_graph(mesh, resolution=0.5)
    coords = [0.5, 1.0, 1.5]
    lattice = [np.array([x, y, z]) for x in coords for y in coords for z in coords]
    expect_nodes = [p for p in lattice if inside_scene(p, mesh)]
    assert np.allclose(graph.nodes, np.asarray(expect_nodes))
    expect_edges = set()
    for i, a in enumerate(expect_nodes):
        for j, b in enumerate(expect_nodes):
            if i < j and np.isclose(np.abs(a - b).sum(), 0.5) and collision_free(mesh, a, b):
                expect_edges.add((i, j))
    assert {(int(a), int(b)) for a, b in graph.edges} == expect_edges
    print("\nACCEPTANCE gridgraph_transcription: PASS")


def test_end_to_end_synthetic_navigation(apartment):
    """Generated apartment scene: every entity observed by >= 5 viewpoints
    yields a best proposal with P2E <= 1.0 m, and tags seen from exactly one
    view never produce a proposal with confidence level > 1; < 60 s."""
    start = time.monotonic()
    tag_map = apartment["map"]
    mesh = apartment["mesh"]
    graph = build_grid_graph(mesh, resolution=0.5)
    labels = load_labels(apartment["labels_path"])

    for tag, (lo, hi) in apartment["objects"].items():
        assert len(tag_map.viewpoints_for(tag)) >= 5
        proposals = localize_tag(tag_map, tag)
        assert proposals, f"no proposals for {tag}"
        best = proposals[0]
        p_nodes = assign_nodes_proposal(graph, best.aabb_min, best.aabb_max, mesh)
        e_nodes = assign_nodes_object(graph, np.asarray(lo), np.asarray(hi), mesh, delta=1.0)
        assert len(p_nodes) and len(e_nodes)
        from tagmap.evaluation import p2e

        dist = p2e(graph, p_nodes, [e_nodes])
        assert dist <= 1.0, f"{tag}: best-proposal P2E {dist:.2f} m exceeds 1.0 m"

    for fp_tag in ("unicorn", "plant"):
        views = tag_map.viewpoints_for(fp_tag)
        assert len(views) == 1
        for p in localize_tag(tag_map, fp_tag):
            assert p.confidence_level <= 1, f"{fp_tag}: confidence {p.confidence_level}"

    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"end-to-end run took {elapsed:.1f} s"
    print(f"\nACCEPTANCE end_to_end_navigation: PASS ({elapsed:.1f} s)")


def test_memory_property(tmp_path):
    """1000-viewpoint synthetic map serializes to < 1 MB and the file is
    byte-stable across source image resolutions (intrinsics fields aside)."""

    def build(scale: float) -> TagMap:
        intr = Intrinsics(fx=320.0 * scale, fy=320.0 * scale, cx=320.0 * scale,
                          cy=240.0 * scale, width=int(640 * scale), height=int(480 * scale))
        rng = np.random.default_rng(77)  # same pose/tag stream for both builds
        m = TagMap()
        for i in range(1000):
            eye = rng.uniform(0, 20, size=3) + np.array([0, 0, 1.0])
            target = eye + rng.normal(size=3) * np.array([2, 2, 0.5])
            while np.linalg.norm(target - eye) < 0.5:
                target = eye + rng.normal(size=3) * np.array([2, 2, 0.5])
            vp = Viewpoint(id=i, pose=make_pose(eye, target), intrinsics=intr,
                           far_plane_dist=float(rng.uniform(1.0, 6.0)))
            tags = [(f"tag{int(rng.integers(0, 120))}", float(rng.uniform(0.2, 1.0)))
                    for _ in range(int(rng.integers(1, 6)))]
            m.insert(vp, tags)
        return m

    paths = []
    for scale in (1.0, 2.0):
        m = build(scale)
        path = tmp_path / f"map_{scale}.json"
        m.save(path)
        size = path.stat().st_size
        assert size < 1_000_000, f"map at scale {scale} is {size} bytes"
        assert TagMap.load(path) == m
        paths.append(path)

    def stripped(path):
        d = json.loads(path.read_text())
        for v in d["viewpoints"]:
            v["intrinsics"] = None
        return json.dumps(d)

    assert stripped(paths[0]) == stripped(paths[1]), "file depends on image resolution"
    print(f"\nACCEPTANCE memory_property: PASS ({paths[0].stat().st_size} bytes)")


def test_parameter_fidelity(capsys):
    """--show-config defaults equal the published construction/localization
    parameter tables exactly."""
    assert main(["--show-config"]) == 0
    config = json.loads(capsys.readouterr().out)
    assert config["construction"]["crop_percentages"] == [5.0, 10.0]
    assert config["construction"]["depth_mean_threshold"] == 0.6
    assert config["construction"]["depth_median_threshold"] == 0.6
    assert config["localization"]["near_plane"] == 0.2
    assert config["localization"]["voxel_size"] == 0.2
    assert config["localization"]["dbscan_eps"] == 0.4
    assert config["localization"]["dbscan_min_points"] == 5
    assert config["localization"]["normalized_vote_thresholds"] == [0.0, 0.25, 0.5, 0.75]
    params = LocalizationParams()
    assert params.normalized_vote_thresholds == (0.0, 0.25, 0.5, 0.75)
    print("\nACCEPTANCE parameter_fidelity: PASS")


def test_mock_grounding_replay(lab_map, mock_script, grounded_queries):
    """The 25 scripted user queries, replayed headless against the mock
    provider and fixture map, record the expected goal entity for all 21
    success rows."""
    provider = ScriptedMockProvider(mock_script)
    executor = ToolExecutor(lab_map)
    assert len(grounded_queries) == 25
    successes = [q for q in grounded_queries if q["success"]]
    assert len(successes) == 21
    hits = 0
    for q in grounded_queries:
        session = ChatSession.start(lab_map.unique_tags())
        answer = chat_turn(session, q["query"], provider, executor)
        assert answer  # every turn ends in assistant text
        if q["success"]:
            assert session.goal is not None, q["query"]
            assert session.goal["tag"] == q["entity"], q["query"]
            hits += 1
    assert hits == 21
    print(f"\nACCEPTANCE mock_grounding_replay: PASS ({hits}/21 success rows)")
