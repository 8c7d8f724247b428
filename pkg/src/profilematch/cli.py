"""Command-line front end.

Exit codes: 0 success, 2 malformed input or config, 3 dimension mismatch.
All numeric output goes through the 17-digit formatter, and every command
is deterministic given its flags and seed; --threads (or the
PROFILEMATCH_THREADS environment variable) only changes wall time.
"""

import argparse
import json
import math
import os
import sys

import numba
import numpy as np

from . import io
from .assignment import baseline_cost_matrix, solve_lap
from .errors import DimensionMismatchError, InputFormatError, ProfileMatchError
from .geometry import pairwise_distances
from .matching import discrepancy_matrix, match
from .models import LabeledSample, kmeans
from .theory import run_mixture_experiment, run_noise_stability_experiment
from .transport import tlb

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DIMENSION = 3


def _apply_threads(flag_value):
    value = flag_value
    if value is None:
        env = os.environ.get("PROFILEMATCH_THREADS")
        if env is None:
            return
        try:
            value = int(env)
        except ValueError as exc:
            raise InputFormatError(f"PROFILEMATCH_THREADS must be an integer, got {env!r}") from exc
    clamped = max(1, min(int(value), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(clamped)


def _sigmas_arg(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sigma list {text!r}") from exc


def _load_distance_matrix(path: str, kind: str):
    if kind == "points":
        return pairwise_distances(io.read_point_cloud_csv(path))
    return io.read_distance_matrix_csv(path)


def cmd_match(args) -> int:
    dmx = _load_distance_matrix(args.source, args.input_kind)
    dmy = _load_distance_matrix(args.target, args.input_kind)
    result = match(discrepancy_matrix(dmx, dmy, args.order), args.threshold)
    io.write_match_csv(args.out, result)
    print(f"n={dmx.n}")
    print(f"m={dmy.n}")
    print(f"inliers={result.inliers.size}")
    print(f"max_discrepancy={io.fmt(np.max(result.discrepancy))}")
    print(f"min_discrepancy={io.fmt(np.min(result.discrepancy))}")
    print(f"mean_discrepancy={io.fmt(np.mean(result.discrepancy))}")
    return EXIT_OK


def cmd_assign(args) -> int:
    if args.baseline:
        if args.input_kind != "points":
            raise InputFormatError("--baseline needs point coordinates, not distances")
        x = io.read_point_cloud_csv(args.source)
        y = io.read_point_cloud_csv(args.target)
        cost = baseline_cost_matrix(x, y)
    else:
        dmx = _load_distance_matrix(args.source, args.input_kind)
        dmy = _load_distance_matrix(args.target, args.input_kind)
        if dmx.n != dmy.n:
            raise DimensionMismatchError(f"assignment needs equal sizes, got {dmx.n} and {dmy.n}")
        cost = discrepancy_matrix(dmx, dmy, order=1.0).entries
    perm, total = solve_lap(cost)
    io.write_permutation_csv(args.out, perm.mapping)
    print(f"n={perm.n}")
    print(f"total_cost={io.fmt(total)}")
    return EXIT_OK


def cmd_tlb(args) -> int:
    dmx = _load_distance_matrix(args.source, args.input_kind)
    dmy = _load_distance_matrix(args.target, args.input_kind)
    value, coupling = tlb(dmx, dmy, args.order)
    print(f"n={dmx.n}")
    print(f"m={dmy.n}")
    print(f"tlb={io.fmt(value)}")
    if args.emit_coupling:
        io.write_coupling_csv(args.emit_coupling, coupling)
        io.write_json(
            args.emit_coupling + ".json",
            {"n": dmx.n, "m": dmy.n, "order": float(args.order), "value": value},
        )
    return EXIT_OK


def _merge_config(args, flag_keys: dict) -> dict:
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise InputFormatError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"bad JSON in {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise InputFormatError("config file must hold a JSON object")
        config.update(loaded)
    for key, attr in flag_keys.items():
        value = getattr(args, attr)
        if value is not None:
            config[key] = value
    return config


def cmd_simulate(args) -> int:
    if args.mode == "mixture":
        config = _merge_config(
            args,
            {
                "d": "d", "K": "K", "t": "t", "s": "s", "n": "n", "m": "m",
                "sigmas": "sigmas", "replicates": "replicates", "seed": "seed",
                "center_scale": "center_scale",
            },
        )
        records = run_mixture_experiment(config)
    else:
        config = _merge_config(
            args,
            {
                "d": "d", "n": "n", "sigmas": "sigmas", "rotation": "rotation",
                "replicates": "replicates", "seed": "seed", "angle": "angle",
            },
        )
        records = run_noise_stability_experiment(config)
    io.write_experiment_csv(args.out, records)
    summary_path = args.summary if args.summary else args.out + ".summary.json"
    io.write_json(summary_path, io.summarize_records(records))
    print(f"records={len(records)}")
    return EXIT_OK


def cmd_cluster(args) -> int:
    cloud = io.read_point_cloud_csv(args.input)
    labels = kmeans(cloud, args.k, args.seed, args.max_iters)
    io.write_labeled_sample_csv(args.out, LabeledSample(cloud, labels))
    print(f"n={cloud.n}")
    print(f"k={args.k}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="profilematch",
        description="Distance-profile matching, assignment matching, and "
        "Gromov-Wasserstein lower bounds for point clouds.",
    )
    parser.add_argument("--threads", type=int, default=None, help="compute thread cap")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pair_io(p):
        p.add_argument("--source", required=True)
        p.add_argument("--target", required=True)
        p.add_argument("--input-kind", choices=("points", "distances"), default="points")

    p = sub.add_parser("match", help="per-source argmin profile matching")
    add_pair_io(p)
    p.add_argument("--order", type=float, default=1.0)
    p.add_argument("--threshold", type=float, default=math.inf)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("assign", help="one-to-one assignment matching")
    add_pair_io(p)
    p.add_argument("--baseline", action="store_true", help="squared-Euclidean cost")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("tlb", help="transport lower bound on Gromov-Wasserstein")
    add_pair_io(p)
    p.add_argument("--order", type=float, default=1.0)
    p.add_argument("--emit-coupling", default=None)
    p.set_defaults(func=cmd_tlb)

    p = sub.add_parser("simulate", help="seeded experiment sweeps")
    mode = p.add_subparsers(dest="mode", required=True)

    pm = mode.add_parser("mixture", help="paired-mixture profile matching sweep")
    pm.add_argument("--config", default=None)
    for name in ("d", "K", "t", "s", "n", "m", "replicates"):
        pm.add_argument(f"--{name}", type=int, default=None)
    pm.add_argument("--seed", type=int, default=None)
    pm.add_argument("--sigmas", type=_sigmas_arg, default=None)
    pm.add_argument("--center-scale", dest="center_scale", type=float, default=None)
    pm.add_argument("--out", required=True)
    pm.add_argument("--summary", default=None)
    pm.set_defaults(func=cmd_simulate)

    pn = mode.add_parser("noise", help="rigid-correspondence noise sweep")
    pn.add_argument("--config", default=None)
    for name in ("d", "n", "replicates"):
        pn.add_argument(f"--{name}", type=int, default=None)
    pn.add_argument("--seed", type=int, default=None)
    pn.add_argument("--sigmas", type=_sigmas_arg, default=None)
    pn.add_argument("--rotation", choices=("two_coord", "full"), default=None)
    pn.add_argument("--angle", type=float, default=None)
    pn.add_argument("--out", required=True)
    pn.add_argument("--summary", default=None)
    pn.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cluster", help="k-means labels for a point cloud")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)

    return parser


def entry(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    try:
        _apply_threads(args.threads)
        return args.func(args)
    except DimensionMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (ProfileMatchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(entry())
