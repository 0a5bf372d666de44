"""Command-line entry point: build, localize, eval, serve.

Exit codes: 0 success, 1 usage error, 2 unreadable/malformed input or output
I/O failure, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import traceback
from pathlib import Path

from . import __version__
from .params import ConstructionParams, EvaluationParams, LocalizationParams, default_config

log = logging.getLogger("tagmap")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


class CliUsageError(Exception):
    pass


class CliInputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse calls this on bad flags
        raise CliUsageError(message)


class _JsonFormatter(logging.Formatter):
    def format(self, record):
        payload = {"level": record.levelname.lower(), "logger": record.name,
                   "message": record.getMessage()}
        return json.dumps(payload)


def _setup_logging(verbose: bool, log_json: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    if log_json:
        handler.setFormatter(_JsonFormatter())
    else:
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


def _csv_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError as e:
        raise CliUsageError(f"expected comma-separated numbers, got {text!r}") from e


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise CliInputError(f"cannot read config file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise CliInputError(f"config file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise CliInputError(f"config file {path} must hold a JSON object")
    return data


def _resolve(args, config: dict, key: str, default):
    """Flag-over-file precedence: explicit flag, then config file, then default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def build_parser() -> _Parser:
    parser = _Parser(prog="tagmap", description="Text-based tag map toolkit")
    parser.add_argument("--show-config", action="store_true",
                        help="print all parameter defaults as JSON and exit")
    parser.add_argument("--version", action="version", version=f"tagmap {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--log-json", action="store_true", help="JSON-lines logs on stderr")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("build", help="build a tag map from a posed RGB-D dataset")
    p.add_argument("--dataset", required=True, help="dataset manifest JSON")
    p.add_argument("--out", required=True, help="output map file")
    p.add_argument("--tagger", choices=["file", "http"], default="file")
    p.add_argument("--tags-dir", help="directory of precomputed per-frame tag files")
    p.add_argument("--tagger-url", help="HTTP tagging service URL")
    p.add_argument("--config", help="JSON config file (flags take precedence)")
    p.add_argument("--jobs", type=int, help="worker threads (default: cores)")
    p.add_argument("--print-summary", action="store_true",
                   help="print the build summary as JSON on stdout")
    p.add_argument("--depth-mean-threshold", type=float, dest="depth_mean_threshold")
    p.add_argument("--depth-median-threshold", type=float, dest="depth_median_threshold")
    p.add_argument("--crop-percentages", type=_csv_floats, dest="crop_percentages",
                   help="comma-separated border crop percentages")
    p.add_argument("--valid-depth-range", type=_csv_floats, dest="valid_depth_range",
                   help="min,max valid depth in meters")

    p = sub.add_parser("localize", help="localize tags from a map")
    p.add_argument("--map", required=True, dest="map_path")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--tag", help="one tag to localize")
    group.add_argument("--all-tags", action="store_true", help="localize every unique tag")
    p.add_argument("--out", help="output JSON file (default: stdout)")
    p.add_argument("--debug-voxels", help="dump the vote grid as a point list (single tag only)")
    p.add_argument("--max-views", type=int,
                   help="cap retrieval to the top-K most confident viewpoints (default: all)")
    p.add_argument("--config", help="JSON config file (flags take precedence)")
    p.add_argument("--voxel-size", type=float, dest="voxel_size")
    p.add_argument("--dbscan-eps", type=float, dest="dbscan_eps")
    p.add_argument("--dbscan-min-points", type=int, dest="dbscan_min_points")
    p.add_argument("--vote-thresholds", type=_csv_floats, dest="normalized_vote_thresholds")
    p.add_argument("--near-plane", type=float, dest="near_plane")

    p = sub.add_parser("eval", help="evaluate localizations against labeled entities")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--mesh", required=True, help="scene mesh (.ply or .obj)")
    p.add_argument("--labels", required=True, help="labels JSON")
    p.add_argument("--mapping", help="class->tags mapping JSON (default: shipped mapping)")
    p.add_argument("--out", required=True, help="output directory for report JSON/CSV/figures")
    p.add_argument("--label-convention", help="label convention, e.g. mp3d")
    p.add_argument("--no-figures", action="store_true", help="skip precision/recall figures")
    p.add_argument("--config", help="JSON config file (flags take precedence)")
    p.add_argument("--jobs", type=int, help="worker threads for per-class evaluation")
    p.add_argument("--grid-resolution", type=float, dest="grid_resolution")
    p.add_argument("--object-thresholds", type=_csv_floats, dest="object_thresholds")
    p.add_argument("--region-thresholds", type=_csv_floats, dest="region_thresholds")
    p.add_argument("--voxel-size", type=float, dest="voxel_size")
    p.add_argument("--dbscan-eps", type=float, dest="dbscan_eps")
    p.add_argument("--dbscan-min-points", type=int, dest="dbscan_min_points")
    p.add_argument("--vote-thresholds", type=_csv_floats, dest="normalized_vote_thresholds")
    p.add_argument("--near-plane", type=float, dest="near_plane")

    p = sub.add_parser("serve", help="run the grounded-chat HTTP service")
    p.add_argument("--map", required=True, dest="map_path")
    p.add_argument("--mesh", help="scene mesh served at /scene/mesh")
    p.add_argument("--graph-distances", action="store_true",
                   help="answer the distance tools with grid-graph shortest paths "
                        "(needs --mesh)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8800)
    p.add_argument("--mock-provider", help="scenario script for the deterministic mock provider")
    p.add_argument("--provider-endpoint", help="chat-completions endpoint URL")
    p.add_argument("--model", default="", help="model name for the HTTP provider")
    p.add_argument("--token-env", default="TAGMAP_LLM_TOKEN",
                   help="env var holding the provider token")
    p.add_argument("--max-rounds", type=int, default=8, help="tool-call rounds per turn")
    p.add_argument("--temperature", type=float, default=0.0)
    p.add_argument("--config", help="JSON config file (flags take precedence)")
    p.add_argument("--voxel-size", type=float, dest="voxel_size")
    p.add_argument("--dbscan-eps", type=float, dest="dbscan_eps")
    p.add_argument("--dbscan-min-points", type=int, dest="dbscan_min_points")
    p.add_argument("--vote-thresholds", type=_csv_floats, dest="normalized_vote_thresholds")
    p.add_argument("--near-plane", type=float, dest="near_plane")
    return parser


def _construction_params(args, config: dict) -> ConstructionParams:
    defaults = ConstructionParams()
    rng = _resolve(args, config, "valid_depth_range", None)
    if rng is not None:
        lo, hi = (rng + (math.inf,))[:2] if len(rng) == 1 else rng[:2]
        rng = (lo, math.inf if hi is None else hi)
    return ConstructionParams(
        depth_mean_threshold=_resolve(args, config, "depth_mean_threshold",
                                      defaults.depth_mean_threshold),
        depth_median_threshold=_resolve(args, config, "depth_median_threshold",
                                        defaults.depth_median_threshold),
        crop_percentages=tuple(_resolve(args, config, "crop_percentages",
                                        defaults.crop_percentages)),
        valid_depth_range=rng or defaults.valid_depth_range,
    )


def _localization_params(args, config: dict) -> LocalizationParams:
    defaults = LocalizationParams()
    return LocalizationParams(
        voxel_size=_resolve(args, config, "voxel_size", defaults.voxel_size),
        dbscan_eps=_resolve(args, config, "dbscan_eps", defaults.dbscan_eps),
        dbscan_min_points=_resolve(args, config, "dbscan_min_points",
                                   defaults.dbscan_min_points),
        normalized_vote_thresholds=tuple(
            _resolve(args, config, "normalized_vote_thresholds",
                     defaults.normalized_vote_thresholds)
        ),
        near_plane=_resolve(args, config, "near_plane", defaults.near_plane),
    )


# ---------------------------------------------------------------- subcommands


def cmd_build(args) -> int:
    from .ingestion import DatasetError, FileTagger, HttpTagger, build_map, load_manifest

    config = _load_config_file(args.config)
    params = _construction_params(args, config)
    if args.tagger == "file":
        if not args.tags_dir:
            raise CliUsageError("--tagger file requires --tags-dir")
        tagger = FileTagger(args.tags_dir)
    else:
        if not args.tagger_url:
            raise CliUsageError("--tagger http requires --tagger-url")
        tagger = HttpTagger(args.tagger_url)

    try:
        frames = load_manifest(args.dataset)
    except DatasetError as e:
        raise CliInputError(str(e)) from e
    tag_map, summary = build_map(frames, tagger, params, jobs=args.jobs)
    try:
        tag_map.save(args.out)
    except OSError as e:
        raise CliInputError(f"cannot write map to {args.out}: {e}") from e
    log.info("map written to %s: %d viewpoints, %d unique tags (%d frames discarded)",
             args.out, summary.kept, summary.unique_tags, summary.n_discarded)
    if args.print_summary:
        print(json.dumps(summary.to_dict()))
    return EXIT_OK


def _load_map(path):
    from .store import TagMap, TagMapError

    try:
        return TagMap.load(path)
    except TagMapError as e:
        raise CliInputError(str(e)) from e


def cmd_localize(args) -> int:
    from .localization import localize_tag, make_frustum, vote

    config = _load_config_file(args.config)
    params = _localization_params(args, config)
    tag_map = _load_map(args.map_path)

    tags = tag_map.unique_tags() if args.all_tags else [args.tag]
    results = [p.to_dict(tag=tag) for tag in tags
               for p in localize_tag(tag_map, tag, params, max_views=args.max_views)]
    text = json.dumps(results, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        log.info("%d proposals written to %s", len(results), args.out)
    else:
        print(text)

    if args.debug_voxels:
        if args.all_tags:
            raise CliUsageError("--debug-voxels needs a single --tag")
        views = tag_map.viewpoints_for(args.tag)
        dump = {"tag": args.tag, "voxel_size": params.voxel_size, "points": []}
        if views:
            grid = vote([make_frustum(vp, params.near_plane) for vp, _ in views],
                        params.voxel_size)
            centers, votes = grid.nonzero_points()
            dump["points"] = [[*map(float, c), int(v)] for c, v in zip(centers, votes)]
        Path(args.debug_voxels).write_text(json.dumps(dump), encoding="utf-8")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .evaluation import (
        GridGraphError,
        LabelsError,
        MappingError,
        MeshError,
        build_grid_graph,
        default_mapping,
        load_labels,
        load_mapping,
        load_mesh,
        precision_recall_report,
    )
    from .evaluation.figures import render_report_figures
    from .localization import localize_tag

    config = _load_config_file(args.config)
    loc_params = _localization_params(args, config)
    eval_defaults = EvaluationParams()
    resolution = _resolve(args, config, "grid_resolution", eval_defaults.grid_resolution)
    object_thresholds = tuple(_resolve(args, config, "object_thresholds",
                                       eval_defaults.object_thresholds))
    region_thresholds = tuple(_resolve(args, config, "region_thresholds",
                                       eval_defaults.region_thresholds))

    tag_map = _load_map(args.map_path)
    try:
        mesh = load_mesh(args.mesh)
    except (OSError, MeshError) as e:
        raise CliInputError(f"cannot load mesh {args.mesh}: {e}") from e
    try:
        labels = load_labels(args.labels, convention=args.label_convention)
    except LabelsError as e:
        raise CliInputError(str(e)) from e
    try:
        mapping = load_mapping(args.mapping) if args.mapping else default_mapping()
    except MappingError as e:
        raise CliInputError(str(e)) from e

    try:
        graph = build_grid_graph(mesh, resolution=resolution,
                                 k_neighbors=eval_defaults.inside_k_neighbors,
                                 mean_dist_threshold=eval_defaults.inside_mean_dist_threshold,
                                 dot_threshold=eval_defaults.inside_dot_threshold)
    except GridGraphError as e:
        raise CliInputError(str(e)) from e
    log.info("grid graph: %d nodes, %d edges at %.2f m", graph.n_nodes, len(graph.edges),
             resolution)

    mapped_tags = sorted({t for tags in mapping.values() for t in tags})
    localizations = {t: localize_tag(tag_map, t, loc_params) for t in mapped_tags if t in tag_map}
    report = precision_recall_report(
        graph, mesh, localizations, labels, mapping,
        object_thresholds=object_thresholds, region_thresholds=region_thresholds,
        object_inflation=eval_defaults.object_inflation,
        jobs=args.jobs or os.cpu_count(),
    )

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        report.save_json(out_dir / "report.json")
        report.save_csv(out_dir / "report.csv")
    except OSError as e:
        raise CliInputError(f"cannot write report to {out_dir}: {e}") from e
    written = [out_dir / "report.json", out_dir / "report.csv"]
    if not args.no_figures:
        written += render_report_figures(report, out_dir / "figures")
    for kind in ("object", "region"):
        block = report.to_dict()["macro"].get(kind)
        if block:
            log.info("macro %s precision: %s", kind, block["precision"])
            log.info("macro %s recall: %s", kind, block["recall"])
    print(json.dumps({"written": [str(p) for p in written], "macro": report.to_dict()["macro"]}))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .grounding import HttpChatProvider, LlmProviderConfig, ProviderError, ScriptedMockProvider
    from .grounding.server import create_app

    config = _load_config_file(args.config)
    loc_params = _localization_params(args, config)
    tag_map = _load_map(args.map_path)
    provider_config = LlmProviderConfig(
        endpoint=args.provider_endpoint or "",
        model=args.model,
        token_env=args.token_env,
        max_rounds=args.max_rounds,
        temperature=args.temperature,
    )
    if args.mock_provider:
        try:
            provider = ScriptedMockProvider.from_file(args.mock_provider)
        except ProviderError as e:
            raise CliInputError(str(e)) from e
    elif args.provider_endpoint:
        try:
            provider = HttpChatProvider(provider_config)
        except ProviderError as e:
            raise CliInputError(str(e)) from e
    else:
        raise CliUsageError("serve needs --mock-provider or --provider-endpoint")

    if args.mesh and not Path(args.mesh).is_file():
        raise CliInputError(f"mesh file {args.mesh} does not exist")
    executor = None
    if args.graph_distances:
        if not args.mesh:
            raise CliUsageError("--graph-distances needs --mesh")
        from .evaluation import GridGraphError, MeshError, build_grid_graph, load_mesh
        from .grounding.tools import ToolExecutor

        try:
            mesh = load_mesh(args.mesh)
            graph = build_grid_graph(mesh)
        except (MeshError, GridGraphError) as e:
            raise CliInputError(str(e)) from e
        log.info("graph distances enabled: %d nodes", graph.n_nodes)
        executor = ToolExecutor(tag_map, loc_params, graph=graph, mesh=mesh,
                                distance_mode="graph")
    app = create_app(tag_map, provider, provider_config, loc_params, mesh_path=args.mesh,
                     executor=executor)
    log.info("serving on %s:%d (%d tags)", args.host, args.port, len(tag_map.unique_tags()))
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except (OSError, SystemExit) as e:
        raise CliInputError(f"server failed to start: {e}") from e
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _setup_logging(getattr(args, "verbose", False), getattr(args, "log_json", False))
        if args.show_config:
            print(json.dumps(default_config(), indent=2))
            return EXIT_OK
        if not args.command:
            raise CliUsageError("a subcommand is required (build, localize, eval, serve)")
        handler = {"build": cmd_build, "localize": cmd_localize,
                   "eval": cmd_eval, "serve": cmd_serve}[args.command]
        return handler(args)
    except CliUsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CliInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
