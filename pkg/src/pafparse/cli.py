"""Command-line interface.

Subcommands: ``gen`` (synthetic datasets), ``parse`` (maps/fields to people),
``eval`` (average precision, with oracle modes), ``compare`` (association
strategies side by side), ``bench`` (stage timings and scaling exponent).
Logs go to stderr; machine-readable results go to stdout; the exit code is 0
exactly when no error occurred.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from . import kernels
from .assembly import SOLVERS, ParseParams, assemble, parse, result_from_grouping
from .association import (
    IntegralParams,
    TWO_POINT_FRACTIONS,
    score_connections,
    score_connections_interior,
)
from .bench import run_bench
from .core import Topology, full_graph_of, load_topology, topology_preset, PRESET_NAMES
from .detection import detect_all
from .errors import ConfigError, PafparseError
from .evaluation import (
    EvalConfig,
    eval_oracle_connection,
    eval_oracle_detection,
    evaluate,
)
from .fileio import read_fields, read_parse, read_scene, write_fields, write_parse, write_scene
from .groundtruth import RenderParams, render_all, render_midpoints, render_paf
from .matching import (
    FULL_GRAPH_MAX_CANDIDATES,
    FULL_GRAPH_MAX_PER_PART,
    match_greedy,
    match_hungarian,
    solve_full_graph,
)
from .synth import NoiseConfig, SceneConfig, generate_scene, perturb

logger = logging.getLogger("pafparse")

NOISE_SEED_OFFSET = 10 ** 6

COMPARE_STRATEGIES = ("paf-hungarian", "paf-greedy", "midpoint", "midpoint2", "fullgraph")


def _resolve_topology(value: str) -> Topology:
    if value in PRESET_NAMES:
        return topology_preset(value)
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"topology {value!r} is neither a preset nor a file")
    return load_topology(path)


def _parse_range(text: str, what: str) -> tuple[int, int]:
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return int(lo), int(hi)
        value = int(text)
        return value, value
    except ValueError:
        raise ConfigError(f"bad {what} {text!r}; use N or LO:HI") from None


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x", 1)
        return int(w), int(h)
    except ValueError:
        raise ConfigError(f"bad size {text!r}; use WIDTHxHEIGHT") from None


def _threads_from_env() -> int:
    raw = os.environ.get("PAFPARSE_THREADS", "1")
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(f"PAFPARSE_THREADS={raw!r} is not an integer") from None
    if threads < 1:
        raise ConfigError(f"PAFPARSE_THREADS must be at least 1, got {threads}")
    return threads


def _render_params(args) -> RenderParams:
    return RenderParams(args.sigma, args.sigma_l, args.truncation)


def _parse_params(args) -> ParseParams:
    return ParseParams(
        nms_threshold=args.nms_threshold,
        num_samples=args.samples,
        solver=args.solver,
        min_parts=args.min_parts,
        min_score=args.min_score,
    )


def _add_render_args(parser) -> None:
    parser.add_argument("--sigma", type=float, default=7.0,
                        help="confidence peak width in pixels")
    parser.add_argument("--sigma-l", type=float, default=5.0, dest="sigma_l",
                        help="limb band half-width in pixels")
    parser.add_argument("--truncation", type=float, default=4.0,
                        help="Gaussian truncation radius in sigmas")


def _add_parse_args(parser) -> None:
    parser.add_argument("--nms-threshold", type=float, default=0.1,
                        help="minimum peak confidence")
    parser.add_argument("--samples", type=int, default=10,
                        help="line integral sample count")
    parser.add_argument("--solver", choices=sorted(SOLVERS), default="hungarian",
                        help="per-limb matching solver")
    parser.add_argument("--min-parts", type=int, default=3,
                        help="discard persons with fewer parts")
    parser.add_argument("--min-score", type=float, default=0.2,
                        help="discard persons with lower mean score per part")


def _add_common(parser) -> None:
    parser.add_argument("--topology", default="mpii14",
                        help="preset name (mpii14, coco18) or topology file path")
    parser.add_argument("--seed", type=int, default=0, help="master random seed")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pafparse",
        description="Multi-person pose parsing on confidence maps and affinity fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic dataset directory")
    _add_common(p_gen)
    _add_render_args(p_gen)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--count", type=int, default=1, help="number of scenes")
    p_gen.add_argument("--persons", default="1", help="person count: N or LO:HI")
    p_gen.add_argument("--size", default="512x512", help="canvas WIDTHxHEIGHT")
    p_gen.add_argument("--scale", default="28:40", help="torso scale range LO:HI in pixels")
    p_gen.add_argument("--min-separation", type=float, default=0.0,
                       help="minimum distance between persons' keypoints")
    p_gen.add_argument("--occlusion", type=float, default=0.0,
                       help="per-keypoint drop probability")
    p_gen.add_argument("--noise-map", type=float, default=0.0,
                       help="Gaussian pixel noise std on confidence maps")
    p_gen.add_argument("--noise-field", type=float, default=0.0,
                       help="Gaussian pixel noise std on field components")
    p_gen.add_argument("--false-peaks", type=float, default=0.0,
                       help="expected spurious peaks per confidence map")

    p_parse = sub.add_parser("parse", help="parse one maps/fields file into persons")
    _add_common(p_parse)
    _add_parse_args(p_parse)
    p_parse.add_argument("fields", help="input .paft file")
    p_parse.add_argument("--out", default=None, help="output file (default stdout)")

    p_eval = sub.add_parser("eval", help="evaluate parses against a dataset directory")
    _add_common(p_eval)
    _add_parse_args(p_eval)
    p_eval.add_argument("dataset", help="directory written by gen")
    p_eval.add_argument("--mode", choices=("full", "oracle-detect", "oracle-connect"),
                        default="full", help="pipeline or oracle ablation")
    p_eval.add_argument("--pred-dir", default=None,
                        help="directory of result_NNNN.pose files (default: parse now)")
    p_eval.add_argument("--pckh", type=float, default=0.5,
                        help="threshold as fraction of the reference length")
    p_eval.add_argument("--sweep", default=None,
                        help="also evaluate fractions LO:HI:STEPS")

    p_cmp = sub.add_parser("compare", help="compare association strategies on a dataset")
    _add_common(p_cmp)
    _add_render_args(p_cmp)
    _add_parse_args(p_cmp)
    p_cmp.add_argument("dataset", help="directory written by gen")
    p_cmp.add_argument("--strategies", default=",".join(COMPARE_STRATEGIES),
                       help="comma-separated subset of: " + ", ".join(COMPARE_STRATEGIES))
    p_cmp.add_argument("--pckh", type=float, default=0.5,
                       help="threshold as fraction of the reference length")
    p_cmp.add_argument("--noise-map", type=float, default=0.0,
                       help="noise std applied to freshly rendered channels")
    p_cmp.add_argument("--false-peaks", type=float, default=0.0,
                       help="spurious peaks for freshly rendered midpoint channels")

    p_bench = sub.add_parser("bench", help="time the parsing stages")
    _add_common(p_bench)
    _add_parse_args(p_bench)
    p_bench.add_argument("--persons", default="2:20", help="person counts LO:HI")
    p_bench.add_argument("--trials", type=int, default=7, help="timed trials per point")
    p_bench.add_argument("--compare-backends", action="store_true",
                         help="run every available kernel backend")

    return parser


def _discover(dataset: Path) -> list[tuple[Path, Path]]:
    scenes = sorted(dataset.glob("scene_*.scene"))
    if not scenes:
        raise ConfigError(f"no scene_*.scene files in {dataset}")
    items = []
    for scene_path in scenes:
        fields_path = scene_path.with_name(
            scene_path.stem.replace("scene_", "fields_", 1) + ".paft"
        )
        if not fields_path.exists():
            raise ConfigError(f"missing fields file {fields_path}")
        items.append((scene_path, fields_path))
    return items


def cmd_gen(args) -> int:
    topology = _resolve_topology(args.topology)
    render_params = _render_params(args)
    persons = _parse_range(args.persons, "--persons")
    scale = _parse_range(args.scale, "--scale")
    width, height = _parse_size(args.size)
    threads = _threads_from_env()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.count < 1:
        raise ConfigError(f"--count must be at least 1, got {args.count}")
    noisy = args.noise_map > 0 or args.noise_field > 0 or args.false_peaks > 0
    for i in range(args.count):
        config = SceneConfig(
            width=width,
            height=height,
            num_persons=persons if persons[0] != persons[1] else persons[0],
            scale_range=(float(scale[0]), float(scale[1])),
            min_separation=args.min_separation,
            occlusion_prob=args.occlusion,
            seed=args.seed + i,
        )
        scene = generate_scene(config, topology)
        maps, fields = render_all(scene, topology, render_params, threads=threads)
        if noisy:
            noise = NoiseConfig(
                map_noise_std=args.noise_map,
                field_noise_std=args.noise_field,
                false_peak_rate=args.false_peaks,
                false_peak_sigma=args.sigma,
                seed=args.seed + i + NOISE_SEED_OFFSET,
            )
            perturbed = perturb(maps, fields, noise)
            maps, fields = perturbed.maps, perturbed.fields
        scene_path = out / f"scene_{i:04d}.scene"
        fields_path = out / f"fields_{i:04d}.paft"
        write_scene(scene_path, scene, topology)
        write_fields(fields_path, maps, fields)
        logger.info("wrote %s (%d persons)", scene_path.name, scene.num_persons)
        print(f"item {i} {scene_path} {fields_path}")
    return 0


def cmd_parse(args) -> int:
    topology = _resolve_topology(args.topology)
    params = _parse_params(args)
    maps, fields = read_fields(args.fields)
    started = time.perf_counter()
    result = parse(maps, fields, topology, params)
    elapsed = (time.perf_counter() - started) * 1000.0
    logger.info("parsed %s in %.2f ms: %d persons, total connection score %.3f",
                args.fields, elapsed, len(result.persons), result.total_score)
    if args.out is None:
        for person in result.persons:
            print(f"person {person.score:.3f} {person.num_parts}")
            for j, name in enumerate(topology.part_names):
                cand = person.parts[j]
                if cand is None:
                    print(f"{name} - - -")
                else:
                    print(f"{name} {cand.x:.3f} {cand.y:.3f} {cand.score:.3f}")
    else:
        write_parse(args.out, result, topology)
    return 0


def _eval_once(items, topology, args, fraction: float):
    params = _parse_params(args)
    config = EvalConfig(pckh_fraction=fraction)
    predictions = []
    scenes = []
    for index, (scene_path, fields_path) in enumerate(items):
        scene = read_scene(scene_path, topology)
        scenes.append(scene)
        if args.mode == "full" and args.pred_dir is not None:
            pose_path = Path(args.pred_dir) / f"result_{index:04d}.pose"
            if not pose_path.exists():
                raise ConfigError(f"missing prediction file {pose_path}")
            predictions.append(read_parse(pose_path, topology))
            continue
        maps, fields = read_fields(fields_path)
        if args.mode == "oracle-detect":
            predictions.append(eval_oracle_detection(scene, fields, topology, params))
        elif args.mode == "oracle-connect":
            candidates = detect_all(maps, params.nms_threshold, params.refine)
            predictions.append(eval_oracle_connection(candidates, scene, topology, config))
        else:
            predictions.append(parse(maps, fields, topology, params))
    return evaluate(predictions, scenes, topology, config)


def cmd_eval(args) -> int:
    topology = _resolve_topology(args.topology)
    items = _discover(Path(args.dataset))
    report = _eval_once(items, topology, args, args.pckh)
    width = max(len(name) for name in topology.part_names)
    print(f"{'Part':<{width}}  {'AP':>8}  {'GT':>6}  {'Preds':>6}")
    for name, ap, gt, preds in zip(
        topology.part_names, report.per_part_ap, report.num_gt, report.num_predictions
    ):
        print(f"{name:<{width}}  {ap:>8.4f}  {gt:>6d}  {preds:>6d}")
    for name, ap in zip(topology.part_names, report.per_part_ap):
        print(f"part {name} {ap:.6f}")
    print(f"map {report.mean_ap:.6f}")
    if args.sweep:
        try:
            lo_s, hi_s, steps_s = args.sweep.split(":")
            lo, hi, steps = float(lo_s), float(hi_s), int(steps_s)
        except ValueError:
            raise ConfigError(f"bad --sweep {args.sweep!r}; use LO:HI:STEPS") from None
        if steps < 2 or not (0 < lo < hi):
            raise ConfigError(f"bad --sweep {args.sweep!r}")
        for i in range(steps):
            fraction = lo + (hi - lo) * i / (steps - 1)
            swept = _eval_once(items, topology, args, fraction)
            print(f"sweep {fraction:.4f} {swept.mean_ap:.6f}")
    return 0


def cmd_compare(args) -> int:
    topology = _resolve_topology(args.topology)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    for name in strategies:
        if name not in COMPARE_STRATEGIES:
            raise ConfigError(f"unknown strategy {name!r}")
    items = _discover(Path(args.dataset))
    params = _parse_params(args)
    render_params = _render_params(args)
    integral = IntegralParams(params.num_samples, params.bilinear)
    config = EvalConfig(pckh_fraction=args.pckh)
    solver = SOLVERS[params.solver]
    full_topology = full_graph_of(topology) if "fullgraph" in strategies else None

    scenes = []
    predictions: dict[str, list] = {name: [] for name in strategies}
    wall: dict[str, float] = {name: 0.0 for name in strategies}
    skipped_fullgraph = 0
    for index, (scene_path, fields_path) in enumerate(items):
        scene = read_scene(scene_path, topology)
        scenes.append(scene)
        maps, fields = read_fields(fields_path)
        candidates = detect_all(maps, params.nms_threshold, params.refine)

        def perturbed_maps(grids):
            if args.noise_map <= 0 and args.false_peaks <= 0:
                return grids
            noise = NoiseConfig(
                map_noise_std=args.noise_map,
                false_peak_rate=args.false_peaks,
                false_peak_sigma=args.sigma,
                seed=args.seed + index + NOISE_SEED_OFFSET,
            )
            return perturb(grids, [], noise).maps

        for name in strategies:
            if name in ("paf-hungarian", "paf-greedy"):
                limb_solver = match_hungarian if name == "paf-hungarian" else match_greedy
                started = time.perf_counter()
                scores = score_connections(fields, candidates, topology, integral)
                matches = [limb_solver(limb_scores) for limb_scores in scores]
                result = assemble(candidates, matches, topology,
                                  params.min_parts, params.min_score)
                wall[name] += time.perf_counter() - started
                predictions[name].append(result)
            elif name in ("midpoint", "midpoint2"):
                fractions = (0.5,) if name == "midpoint" else TWO_POINT_FRACTIONS
                mid_maps = [
                    perturbed_maps(render_midpoints(scene, topology, c, render_params, fractions))
                    for c in range(topology.num_limbs)
                ]
                started = time.perf_counter()
                scores = score_connections_interior(
                    mid_maps, candidates, topology, fractions, params.bilinear
                )
                matches = [solver(limb_scores) for limb_scores in scores]
                result = assemble(candidates, matches, topology,
                                  params.min_parts, params.min_score)
                wall[name] += time.perf_counter() - started
                predictions[name].append(result)
            else:
                too_big = candidates.total > FULL_GRAPH_MAX_CANDIDATES or any(
                    len(group) > FULL_GRAPH_MAX_PER_PART for group in candidates.by_part
                )
                if too_big:
                    skipped_fullgraph += 1
                    predictions[name].append(None)
                    continue
                full_fields = [
                    render_paf(scene, full_topology, c, render_params)
                    for c in range(full_topology.num_limbs)
                ]
                started = time.perf_counter()
                scores = score_connections(full_fields, candidates, full_topology, integral)
                grouping = solve_full_graph(candidates, scores, full_topology)
                result = result_from_grouping(grouping, candidates, scores, full_topology,
                                              params.min_parts, params.min_score)
                wall[name] += time.perf_counter() - started
                predictions[name].append(result)

    if skipped_fullgraph:
        logger.warning("fullgraph skipped on %d of %d scenes (instance too large)",
                       skipped_fullgraph, len(items))
    print(f"{'Strategy':<14}  {'mAP':>8}  {'wall_ms':>10}")
    for name in strategies:
        preds = predictions[name]
        usable = [(p, s) for p, s in zip(preds, scenes) if p is not None]
        if not usable:
            logger.warning("strategy %s produced no results", name)
            continue
        report = evaluate([p for p, _ in usable], [s for _, s in usable], topology, config)
        ms = wall[name] * 1000.0
        print(f"{name:<14}  {report.mean_ap:>8.4f}  {ms:>10.3f}")
        print(f"strategy {name} map {report.mean_ap:.6f} wall_ms {ms:.3f}")
    return 0


def cmd_bench(args) -> int:
    topology = _resolve_topology(args.topology)
    params = _parse_params(args)
    lo, hi = _parse_range(args.persons, "--persons")
    if lo < 1 or hi < lo:
        raise ConfigError(f"bad --persons range {args.persons!r}")
    counts = list(range(lo, hi + 1))
    backends = list(kernels.available_backends()) if args.compare_backends else None
    report = run_bench(counts, args.trials, topology, params, args.seed, backends)
    header = (f"{'backend':<8} {'persons':>7} {'detect_ms':>10} {'score_ms':>9} "
              f"{'match_ms':>9} {'assemble_ms':>12} {'total_ms':>9} {'cnn_ms':>7}")
    print(header)
    for row in report.rows:
        print(f"{row.backend:<8} {row.num_persons:>7d} {row.detect_ms:>10.3f} "
              f"{row.score_ms:>9.3f} {row.match_ms:>9.3f} {row.assemble_ms:>12.3f} "
              f"{row.total_ms:>9.3f} {row.cnn_ms:>7}")
    for row in report.rows:
        print(f"bench {row.backend} {row.num_persons} {row.detect_ms:.4f} "
              f"{row.score_ms:.4f} {row.match_ms:.4f} {row.assemble_ms:.4f} "
              f"{row.total_ms:.4f}")
    for backend, exponent in report.exponents.items():
        print(f"exponent {backend} {exponent:.4f}")
    largest = max(counts)
    for backend in report.exponents:
        total = next(
            row.total_ms for row in report.rows
            if row.backend == backend and row.num_persons == largest
        )
        if total > 10.0:
            logger.warning(
                "%s backend parses %d persons in %.2f ms (above the 10 ms target)",
                backend, largest, total,
            )
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "parse": cmd_parse,
    "eval": cmd_eval,
    "compare": cmd_compare,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except PafparseError as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
