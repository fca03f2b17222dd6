"""``mcan-nav`` command line: tune, simulate, track, evaluate, plot.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical fault.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import defaults
from .citysim import VehicleConfig, parse_osm, rasterize, simulate_tracks, synthetic_city_osm
from .datasets import read_dataset, read_estimates, write_dataset, write_estimates
from .errors import ConfigurationError, McanError, NetworkCollapse, UndecodableError
from .evaluation import comparison_table, evaluate
from .multiscale import DEFAULT_SCALES, DEFAULT_SIZE, SINGLE_SCALE_RESOLUTION, SINGLE_SCALE_SIZE, track_trajectory
from .plotting import emit_plot
from .tuning import GaConfig, Genome, run_ga

log = logging.getLogger("mcan_nav")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _labelled(value: str) -> tuple[str, Path]:
    label, sep, path = value.partition("=")
    if not sep or not label or not path:
        raise argparse.ArgumentTypeError(f"expected LABEL=PATH, got {value!r}")
    return label, Path(path)


def cmd_tune(args) -> int:
    if args.config is not None and not args.config.is_file():
        args.parser.error(f"config file {args.config} does not exist")
    config = GaConfig.load(args.config) if args.config else GaConfig()
    trial = replace(config.trial, topology=args.topology, **({"steps": args.steps} if args.steps else {}))
    changes = {"rng_seed": args.seed, "trial": trial}
    if args.workers is not None:
        changes["parallel_workers"] = args.workers
    if args.generations is not None:
        changes["max_generations"] = args.generations
    config = replace(config, **changes)
    result = run_ga(config)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    genome_path = args.out_dir / f"genome_{args.topology}.json"
    result.best.save(genome_path, topology=args.topology, fitness=result.best_fitness, seed=args.seed)
    result.write_history(args.out_dir / f"history_{args.topology}.csv")
    print(f"best {result.best} fitness {result.best_fitness:.4f} -> {genome_path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    source = synthetic_city_osm(args.synthetic_city) if args.osm is None else args.osm
    network = parse_osm(source)
    grid = rasterize(network, args.resolution)
    result = simulate_tracks(grid, args.tracks, seed=args.seed, vehicle=VehicleConfig(), dt=args.dt, min_separation_m=args.min_separation)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    grid.save(args.out_dir / "occupancy.pgm")
    for track in result.tracks:
        write_dataset(track, args.out_dir / f"{track.name}.csv")
    summary = {
        "seed": args.seed,
        "requested_tracks": args.tracks,
        "tracks": [{"name": t.name, "samples": len(t), "distance_m": t.total_distance} for t in result.tracks],
        "failures": [{"index": i, "error": msg} for i, msg in result.failures],
        "total_km": result.total_distance / 1000.0,
    }
    (args.out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{len(result.tracks)}/{args.tracks} tracks, {summary['total_km']:.1f} km -> {args.out_dir}")
    if args.tracks and not result.tracks:
        return EXIT_DATA
    return EXIT_OK


def _genome(path, fallback) -> Genome:
    return Genome.load(path) if path is not None else fallback


def cmd_track(args) -> int:
    dataset = read_dataset(args.dataset)
    params = _genome(args.genome, defaults.POSITION_GENOME).to_params()
    hd_params = _genome(args.hd_genome, defaults.HD_GENOME).to_params()
    if args.single_scale:
        scales, size = (args.resolution,), SINGLE_SCALE_SIZE
    else:
        scales, size = tuple(args.scales), DEFAULT_SIZE
    poses = track_trajectory(dataset.samples(), dataset.initial_pose(), params, hd_params, scales=scales, n=size) if len(dataset) else []
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_estimates(poses, args.out)
    print(f"{len(poses)} poses -> {args.out}")
    return EXIT_OK


def _resolve_estimate(path: Path, truth: Path, many: bool) -> Path:
    if path.is_dir():
        return path / truth.name
    if many:
        raise ConfigurationError(f"{path} must be a directory when several truth files are given")
    return path


def cmd_evaluate(args) -> int:
    labels = [label for label, _ in args.estimate]
    reports, table = [], {label: [] for label in labels}
    many = len(args.truth) > 1
    for truth_path in args.truth:
        truth = read_dataset(truth_path)
        for label, path in args.estimate:
            poses = read_estimates(_resolve_estimate(path, truth_path, many))
            estimate = np.array([[p.x, p.y] for p in poses]).reshape(-1, 2)
            report = evaluate(estimate, truth.truth_xy, label=f"{truth_path.stem}:{label}", segment_length=args.segment_length)
            reports.append(report)
            table[label].append(report.ate_per_meter)
    text = comparison_table({args.name: table}, labels)
    print(text)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "schema": "mcan_nav.metric_report/1",
            "reports": [json.loads(r.to_json()) for r in reports],
            "summary": {label: {"mean_ate_per_meter": float(np.mean(v)), "std_ate_per_meter": float(np.std(v))} for label, v in table.items()},
        }
        args.out.write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_plot(args) -> int:
    trajectories = {}
    if args.truth:
        truth = read_dataset(args.truth)
        trajectories["ground truth"] = truth.truth_xy
    for label, path in args.estimate:
        trajectories[label] = np.array([[p.x, p.y] for p in read_estimates(path)]).reshape(-1, 2)
    if not trajectories:
        args.parser.error("give --truth and/or at least one --estimate")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    emit_plot(trajectories, args.out)
    print(f"plot -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcan-nav", description="Multiscale attractor-network dead reckoning toolkit.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tune", help="tune [A, E, gamma, phi] with the genetic algorithm")
    p.add_argument("--topology", choices=("1d", "2d"), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", type=Path, help="GA configuration JSON (GaConfig fields)")
    p.add_argument("--workers", type=int, help="override parallel_workers")
    p.add_argument("--generations", type=int, help="override max_generations")
    p.add_argument("--steps", type=int, help="override the fitness trial length")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.set_defaults(func=cmd_tune, parser=p)

    p = sub.add_parser("simulate", help="generate city trajectories from an OSM extract")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--osm", type=Path, help="OSM XML extract")
    source.add_argument("--synthetic-city", type=int, metavar="SEED", help="use a generated street grid instead")
    p.add_argument("--tracks", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=float, default=10.0, help="metres per grid cell")
    p.add_argument("--dt", type=float, default=1.0, help="sample interval in seconds")
    p.add_argument("--min-separation", type=float, default=0.0, help="minimum straight-line endpoint distance in metres")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.set_defaults(func=cmd_simulate, parser=p)

    p = sub.add_parser("track", help="dead-reckon a dataset through the networks")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--genome", type=Path, help="2D genome JSON (default: shipped tuned genome)")
    p.add_argument("--hd-genome", type=Path, help="1D genome JSON (default: shipped tuned genome)")
    p.add_argument("--single-scale", action="store_true", help=f"one {SINGLE_SCALE_SIZE}x{SINGLE_SCALE_SIZE} sheet instead of the multiscale stack")
    p.add_argument("--resolution", type=float, default=SINGLE_SCALE_RESOLUTION, help="single-scale metres per neuron")
    p.add_argument("--scales", type=float, nargs="+", default=list(DEFAULT_SCALES), help="multiscale metres per neuron")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_track, parser=p)

    p = sub.add_parser("evaluate", help="ATE, ATE/m and SAD against ground truth")
    p.add_argument("--truth", type=Path, nargs="+", required=True, help="dataset CSVs")
    p.add_argument("--estimate", type=_labelled, action="append", required=True, metavar="LABEL=PATH",
                   help="estimate CSV, or a directory of CSVs named like the truth files")
    p.add_argument("--segment-length", type=float, help="also score realigned segments of this many metres")
    p.add_argument("--name", default="dataset", help="row label in the table")
    p.add_argument("--out", type=Path, help="JSON report path")
    p.set_defaults(func=cmd_evaluate, parser=p)

    p = sub.add_parser("plot", help="SVG overlay of trajectories")
    p.add_argument("--truth", type=Path)
    p.add_argument("--estimate", type=_labelled, action="append", default=[], metavar="LABEL=PATH")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_plot, parser=p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NetworkCollapse, UndecodableError, FloatingPointError) as exc:
        print(f"numerical fault: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (McanError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
