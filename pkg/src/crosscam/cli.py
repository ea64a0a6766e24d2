"""Command-line surface: simulate, estimate, evaluate, stats.

Every subcommand writes a manifest next to its outputs and is byte
deterministic given the same inputs and seeds. Exit codes: 0 success,
2 parse errors, 3 validation errors, 4 degenerate-data errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .embeddings import read_observations, write_observations
from .errors import CrosscamError, ValidationError
from .evaluation import (
    cmc,
    export_cmc,
    export_heatmap,
    render_rank_k_csv,
    rank_k_table,
    separation,
)
from .fusion import QueryGallerySplit, rank_all, rankings_csv, similarity_matrix
from .graph import read_graph
from .manifest import RunManifest, sha256_file
from .simulator import parse_sim_config, simulate, split_identities
from .transition import (
    entry_exit_stats,
    estimate,
    export_matrix,
    extract_trajectories,
    parse_matrix,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crosscam",
        description="Cross-camera person re-identification ranking with "
                    "camera-transition priors.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sim = sub.add_parser(
        "simulate", help="generate a synthetic multi-camera dataset")
    p_sim.add_argument("--config", required=True,
                       help="flat key-value simulator config file")
    p_sim.add_argument("--out", required=True,
                       help="output NDJSON dataset path")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the config seed")

    p_est = sub.add_parser(
        "estimate", help="estimate the camera transition matrix")
    p_est.add_argument("--graph", required=True, help="edge-list graph file")
    p_est.add_argument("--train", required=True,
                       help="labeled NDJSON observations")
    p_est.add_argument("--alpha", type=float, default=0.0,
                       help="additive smoothing (default 0)")
    p_est.add_argument("--out", required=True, help="output transition CSV")

    p_eval = sub.add_parser(
        "evaluate", help="rank, fuse and score a testing dataset")
    p_eval.add_argument("--graph", required=True, help="edge-list graph file")
    p_eval.add_argument("--test", required=True,
                        help="labeled NDJSON observations")
    group = p_eval.add_mutually_exclusive_group(required=True)
    group.add_argument("--transition", help="transition CSV from 'estimate'")
    group.add_argument("--appearance-only", action="store_true",
                       help="skip fusion, evaluate raw appearance ranking")
    p_eval.add_argument("--out-dir", required=True)
    p_eval.add_argument("--threads", type=int, default=1,
                        help="worker threads for similarity rows; does not "
                             "affect output bytes")
    p_eval.add_argument("--export-depth", type=int, default=10,
                        help="gallery depth kept in rankings CSVs")
    p_eval.add_argument("--ks", default="1,5,10,15",
                        help="comma-separated ranks for the before/after table")

    p_stats = sub.add_parser(
        "stats", help="entry/exit and per-camera statistics")
    p_stats.add_argument("--data", required=True,
                         help="labeled NDJSON observations")
    p_stats.add_argument("--out", required=True, help="output CSV path")
    return parser


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _cmd_simulate(args: argparse.Namespace) -> int:
    with open(args.config, "r", encoding="utf-8") as handle:
        config_text = handle.read()
    parsed = parse_sim_config(config_text, source=args.config,
                              base_dir=os.path.dirname(os.path.abspath(args.config)))
    config = parsed.config
    if args.seed is not None:
        from dataclasses import replace
        config = replace(config, seed=args.seed)
    world = simulate(config)
    write_observations(args.out, world.observations)
    manifest = RunManifest(version=__version__, subcommand="simulate",
                           seed=config.seed,
                           config_sha256=sha256_file(args.config))
    manifest.add_input("config", args.config)
    manifest.params = {
        "identities": config.identities,
        "cameras": list(config.graph.cameras),
        "parts": config.parts,
        "dim": config.dim,
        "noise_sigma": config.noise_sigma,
        "bias_sigma": config.bias_sigma,
    }
    manifest.add_output("dataset", args.out)
    if parsed.split_ratio is not None:
        stem, ext = os.path.splitext(args.out)
        train_path = f"{stem}.train{ext or '.ndjson'}"
        test_path = f"{stem}.test{ext or '.ndjson'}"
        train, test = split_identities(world, parsed.split_ratio,
                                       parsed.split_seed)
        write_observations(train_path, train)
        write_observations(test_path, test)
        manifest.params["split_ratio"] = parsed.split_ratio
        manifest.params["split_seed"] = parsed.split_seed
        manifest.add_output("train", train_path)
        manifest.add_output("test", test_path)
    manifest.write(args.out + ".manifest.json")
    return 0


def _cmd_estimate(args: argparse.Namespace) -> int:
    graph = read_graph(args.graph)
    observations = read_observations(args.train)
    trajectories = extract_trajectories(observations)
    model = estimate(graph, trajectories, smoothing=args.alpha)
    for (origin, dest), count in sorted(model.non_adjacent.items()):
        print(f"diagnostic: {count} transition(s) {origin}->{dest} between "
              "non-adjacent cameras ignored", file=sys.stderr)
    _write_text(args.out, export_matrix(model))
    manifest = RunManifest(version=__version__, subcommand="estimate")
    manifest.add_input("graph", args.graph)
    manifest.add_input("train", args.train)
    manifest.params = {"alpha": args.alpha,
                       "trajectories": len(trajectories),
                       "undefined_rows": list(model.undefined)}
    manifest.add_output("transition", args.out)
    manifest.write(args.out + ".manifest.json")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    if args.threads < 1:
        raise ValidationError("--threads must be >= 1")
    try:
        ks = [int(part) for part in args.ks.split(",") if part.strip()]
    except ValueError:
        raise ValidationError(f"bad --ks value {args.ks!r}") from None
    graph = read_graph(args.graph)
    test = read_observations(args.test)
    model = None
    if not args.appearance_only:
        with open(args.transition, "r", encoding="utf-8") as handle:
            model = parse_matrix(handle.read(), graph, source=args.transition)
    os.makedirs(args.out_dir, exist_ok=True)
    labels = {obs.obs_id: obs.person_id for obs in test}
    split = QueryGallerySplit(queries=test, gallery=test)

    manifest = RunManifest(version=__version__, subcommand="evaluate")
    manifest.add_input("graph", args.graph)
    manifest.add_input("test", args.test)
    manifest.params = {"appearance_only": bool(args.appearance_only),
                       "export_depth": args.export_depth, "ks": ks}

    def emit(name: str, filename: str, payload: str | bytes) -> str:
        path = os.path.join(args.out_dir, filename)
        if isinstance(payload, bytes):
            with open(path, "wb") as handle:
                handle.write(payload)
        else:
            _write_text(path, payload)
        manifest.add_output(name, path)
        return path

    results_before = rank_all(test, test, model=None, threads=args.threads)
    curve_before = cmc(results_before, labels)
    matrix_before = similarity_matrix(split, model=None, threads=args.threads)
    emit("cmc_appearance", "cmc_appearance.csv",
         export_cmc(curve_before, header=True) + "\n")
    emit("heatmap_appearance", "heatmap_appearance.pgm",
         export_heatmap(matrix_before))
    emit("rankings_appearance", "rankings_appearance.csv",
         rankings_csv(results_before, labels, depth=args.export_depth))
    sep_before = separation(matrix_before, test, test)

    summary = [
        "metric,value",
        f"queries,{len(test)}",
        f"retained,{curve_before.query_count}",
        f"dropped,{curve_before.dropped}",
        f"rank1_appearance,{curve_before.accuracy_at(1):.4f}",
        f"separation_ratio_appearance,{sep_before.ratio:.6f}",
    ]

    if model is not None:
        manifest.add_input("transition", args.transition)
        results_after = rank_all(test, test, model=model, threads=args.threads)
        curve_after = cmc(results_after, labels)
        matrix_after = similarity_matrix(split, model=model,
                                         threads=args.threads)
        emit("cmc_fused", "cmc_fused.csv",
             export_cmc(curve_after, header=True) + "\n")
        emit("heatmap_fused", "heatmap_fused.pgm",
             export_heatmap(matrix_after))
        emit("rankings_fused", "rankings_fused.csv",
             rankings_csv(results_after, labels, depth=args.export_depth))
        rows = rank_k_table(curve_before, curve_after, ks)
        emit("rank_k_table", "rank_k_table.csv", render_rank_k_csv(rows))
        sep_after = separation(matrix_after, test, test)
        summary.append(f"rank1_fused,{curve_after.accuracy_at(1):.4f}")
        summary.append(
            f"rank1_delta,{curve_after.accuracy_at(1) - curve_before.accuracy_at(1):+.4f}")
        summary.append(f"separation_ratio_fused,{sep_after.ratio:.6f}")

    emit("summary", "summary.csv", "\n".join(summary) + "\n")
    manifest.write(os.path.join(args.out_dir, "manifest.json"))
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    observations = read_observations(args.data)
    trajectories = extract_trajectories(observations)
    stats = entry_exit_stats(trajectories)
    obs_per_camera: dict[str, int] = {}
    for obs in observations:
        obs_per_camera[obs.camera] = obs_per_camera.get(obs.camera, 0) + 1
    lines = ["per_camera", "camera,entries,exits"]
    for cam, (entries, exits) in stats.per_camera.items():
        lines.append(f"{cam},{entries},{exits}")
    lines.append("per_day")
    lines.append("day,trajectories")
    for day, count in stats.per_day.items():
        lines.append(f"{day},{count}")
    lines.append("observations")
    lines.append("camera,count")
    for cam in sorted(obs_per_camera):
        lines.append(f"{cam},{obs_per_camera[cam]}")
    _write_text(args.out, "\n".join(lines) + "\n")
    manifest = RunManifest(version=__version__, subcommand="stats")
    manifest.add_input("data", args.data)
    manifest.params = {"trajectories": len(trajectories)}
    manifest.add_output("stats", args.out)
    manifest.write(args.out + ".manifest.json")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "evaluate": _cmd_evaluate,
    "stats": _cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except CrosscamError as exc:
        print(f"crosscam {args.subcommand}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"crosscam {args.subcommand}: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    raise SystemExit(main())
