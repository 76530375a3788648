"""Command-line entry point.

Subcommands: simulate, fit, segment, featurize, cluster, ari, cpfreq,
bench (ari | cp), pipeline. Exit codes: 0 success, 2 input error,
3 numerical failure, 4 internal invariant violation. Error messages
name the package module where the failure originated.

Multi-knob subcommands (pipeline, bench) accept --config FILE with JSON
keys matching their config fields; explicit flags override the file,
which overrides built-in defaults, and the effective values are echoed
to config.resolved.json in the output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback

import numpy as np

from .bench import BenchConfig, run_ari_benchmark, run_cp_study
from .clustering import (
    K_MAX_DEFAULT,
    K_MIN_DEFAULT,
    RESTARTS_DEFAULT,
    kmeans,
    select_k_majority,
)
from .dataio import load_dataset, read_table, write_table
from .errors import (
    ConvergenceError,
    EmptySegmentError,
    InputError,
    InvariantError,
    PlfcError,
)
from .metrics import ari, changepoint_frequencies
from .pipeline import (
    K_MAX_SEGMENT_DEFAULT,
    PipelineConfig,
    run_pipeline,
    segment_dataset,
)
from .segmentation import S_THRESHOLD_DEFAULT, Segmentation
from .spline_features import featurize, scale_features
from .trend_filter import (
    EPS_REL_DEFAULT,
    GRID_SIZE_DEFAULT,
    MAX_ITER_DEFAULT,
    TOL_DEFAULT,
    search_lambda,
)

__all__ = ["main"]


def _join(values) -> str:
    return ";".join(repr(float(v)) for v in values)


def _split(cell: str) -> list:
    cell = cell.strip()
    if not cell:
        return []
    return [float(part) for part in cell.split(";")]


def _write_segments(path, ids, segs):
    k_m = max((s.k_hat for s in segs), default=0)
    header = (
        ["curve_id", "k_hat"]
        + [f"knot_{j}" for j in range(1, k_m + 1)]
        + [f"theta_{j}" for j in range(1, k_m + 3)]
        + ["rss"]
    )
    rows = []
    for cid, seg in zip(ids, segs):
        knots = list(seg.knots) + [0.0] * (k_m - seg.k_hat)
        theta = list(seg.theta) + [0.0] * (k_m - seg.k_hat)
        rows.append([cid, seg.k_hat] + knots + theta + [seg.rss])
    write_table(rows, path, header)


def _read_segments(path):
    header, rows = read_table(path)
    if len(header) < 4 or header[0] != "curve_id" or header[1] != "k_hat":
        raise InputError(f"{path}: not a segments table")
    k_m = sum(1 for name in header if name.startswith("knot_"))
    ids = []
    segs = []
    for r, row in enumerate(rows, start=2):
        try:
            k = int(row[1])
            knots = np.asarray([float(v) for v in row[2 : 2 + k]])
            theta = np.asarray([float(v) for v in row[2 + k_m : 2 + k_m + k + 2]])
            rss = float(row[-1])
        except (ValueError, IndexError) as exc:
            raise InputError(f"{path} row {r}: {exc}") from exc
        ids.append(row[0])
        segs.append(Segmentation(knots=knots, k_hat=k, theta=theta, rss=rss))
    return ids, segs


def _write_features(path, ids, k_hats, matrix, k_m):
    header = (
        ["curve_id", "k_hat"]
        + [f"theta_{j}" for j in range(1, k_m + 3)]
        + [f"t_{j}" for j in range(1, k_m + 1)]
    )
    rows = [
        [cid, k] + [float(v) for v in row]
        for cid, k, row in zip(ids, k_hats, matrix)
    ]
    write_table(rows, path, header)


def _read_features(path):
    header, rows = read_table(path)
    if len(header) < 4 or header[0] != "curve_id" or header[1] != "k_hat":
        raise InputError(f"{path}: not a features table")
    ids = [row[0] for row in rows]
    try:
        matrix = np.asarray([[float(v) for v in row[2:]] for row in rows])
    except ValueError as exc:
        raise InputError(f"{path}: non-numeric feature value ({exc})") from exc
    if matrix.ndim != 2:
        raise InputError(f"{path}: ragged feature rows")
    return ids, matrix


def _write_labels(path, ids, labels):
    rows = [[cid, int(lab)] for cid, lab in zip(ids, labels)]
    write_table(rows, path, ["curve_id", "label"])


def _read_labels(path):
    header, rows = read_table(path)
    if not header or header[0] != "curve_id":
        raise InputError(f"{path}: first column must be curve_id")
    label_col = None
    for name in ("label", "z"):
        if name in header:
            label_col = header.index(name)
            break
    if label_col is None:
        raise InputError(f"{path}: no label or z column")
    ids = []
    labels = []
    for r, row in enumerate(rows, start=2):
        try:
            labels.append(int(float(row[label_col])))
        except (ValueError, IndexError) as exc:
            raise InputError(f"{path} row {r}: bad label ({exc})") from exc
        ids.append(row[0])
    return ids, labels


def _write_json_file(obj, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=2))
        fh.write("\n")


def _write_kselection(path, selection, k_star):
    report = {
        "forced": selection is None,
        "k_star": int(k_star),
        "votes": None if selection is None else selection.votes,
        "per_index_choice": None if selection is None else selection.per_index_choice,
    }
    _write_json_file(report, path)


def _merge_config(defaults: dict, config_path, cli_values: dict) -> dict:
    resolved = dict(defaults)
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise InputError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise InputError("config file must hold a JSON object")
        unknown = sorted(set(file_values) - set(defaults))
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(unknown)}")
        for key, value in file_values.items():
            if isinstance(value, list):
                value = tuple(value)
            resolved[key] = value
    for key, value in cli_values.items():
        if value is not None:
            resolved[key] = value
    return resolved


def _parse_sigmas(text: str) -> tuple:
    try:
        sigmas = tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise InputError(f"bad sigma list {text!r}") from exc
    if not sigmas:
        raise InputError(f"bad sigma list {text!r}")
    return sigmas


def _cmd_simulate(args) -> int:
    from .simulate import sample_dataset

    dataset, _labels, truths = sample_dataset(
        args.model, args.sigma, args.n_curves, seed=args.seed, jitter=args.jitter
    )
    rows = [
        [curve.id, float(x), float(y)]
        for curve in dataset.curves
        for x, y in zip(curve.x, curve.y)
    ]
    write_table(rows, args.out, ["curve_id", "x", "y"])
    if args.truth is not None:
        truth_rows = [
            [t.curve_id, t.z, t.u, t.v, _join(t.knots), _join(t.theta)]
            for t in truths
        ]
        write_table(
            truth_rows, args.truth, ["curve_id", "label", "u", "v", "knots", "theta"]
        )
    return 0


def _cmd_fit(args) -> int:
    dataset = load_dataset(args.input)
    rows = []
    for curve in dataset.curves:
        fit = search_lambda(
            curve.y,
            k_max=args.kmax if args.kmax is not None else K_MAX_SEGMENT_DEFAULT,
            grid_size=args.grid_size if args.grid_size is not None else GRID_SIZE_DEFAULT,
            eps_rel=args.eps_rel if args.eps_rel is not None else EPS_REL_DEFAULT,
            tol=args.tol if args.tol is not None else TOL_DEFAULT,
            max_iter=args.max_iter if args.max_iter is not None else MAX_ITER_DEFAULT,
        )
        marked = set(int(i) for i in fit.candidate_indices)
        for i, (x, y) in enumerate(zip(curve.x, curve.y)):
            rows.append(
                [
                    curve.id,
                    float(x),
                    float(y),
                    float(fit.beta[i]),
                    1 if i in marked else 0,
                    float(fit.lam),
                    int(fit.underfilled),
                ]
            )
    write_table(
        rows, args.out, ["curve_id", "x", "y", "beta", "candidate", "lam", "underfilled"]
    )
    return 0


def _pipeline_config_from(args) -> PipelineConfig:
    defaults = {
        "k_max": K_MAX_SEGMENT_DEFAULT,
        "s_threshold": S_THRESHOLD_DEFAULT,
        "grid_size": GRID_SIZE_DEFAULT,
        "eps_rel": EPS_REL_DEFAULT,
        "tol": TOL_DEFAULT,
        "max_iter": MAX_ITER_DEFAULT,
        "cluster_k_min": K_MIN_DEFAULT,
        "cluster_k_max": K_MAX_DEFAULT,
        "restarts": RESTARTS_DEFAULT,
        "seed": 0,
        "jitter": "verbatim",
        "force_k": None,
        "threads": 1,
    }
    cli_values = {
        "k_max": args.kmax,
        "s_threshold": args.s,
        "grid_size": args.grid_size,
        "eps_rel": args.eps_rel,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "cluster_k_min": args.cluster_kmin,
        "cluster_k_max": args.cluster_kmax,
        "restarts": args.restarts,
        "seed": args.seed,
        "force_k": args.force_k,
        "threads": args.threads,
    }
    resolved = _merge_config(defaults, getattr(args, "config", None), cli_values)
    return PipelineConfig(**resolved)


def _cmd_segment(args) -> int:
    dataset = load_dataset(args.input)
    config = PipelineConfig(
        k_max=args.kmax if args.kmax is not None else K_MAX_SEGMENT_DEFAULT,
        s_threshold=args.s if args.s is not None else S_THRESHOLD_DEFAULT,
        grid_size=args.grid_size if args.grid_size is not None else GRID_SIZE_DEFAULT,
        eps_rel=args.eps_rel if args.eps_rel is not None else EPS_REL_DEFAULT,
        tol=args.tol if args.tol is not None else TOL_DEFAULT,
        max_iter=args.max_iter if args.max_iter is not None else MAX_ITER_DEFAULT,
        threads=args.threads if args.threads is not None else 1,
    )
    segs = segment_dataset(dataset, config)
    _write_segments(args.out, dataset.ids(), segs)
    return 0


def _cmd_featurize(args) -> int:
    ids, segs = _read_segments(args.segments)
    matrix, k_m = featurize(segs)
    _write_features(args.out, ids, [s.k_hat for s in segs], matrix, k_m)
    return 0


def _cmd_cluster(args) -> int:
    ids, matrix = _read_features(args.features)
    if not args.no_scale:
        matrix, _, _ = scale_features(matrix)
    if args.force_k is not None:
        selection = None
        k_star = args.force_k
    else:
        selection = select_k_majority(
            matrix,
            k_min=args.kmin,
            k_max=args.kmax,
            restarts=args.restarts,
            seed=args.seed,
        )
        k_star = selection.k_star
    partition = kmeans(matrix, k_star, restarts=args.restarts, seed=args.seed)
    _write_labels(args.out, ids, partition.labels)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    _write_kselection(os.path.join(out_dir, "kselection.json"), selection, partition.k)
    return 0


def _cmd_ari(args) -> int:
    ids_a, labels_a = _read_labels(args.labels_a)
    ids_b, labels_b = _read_labels(args.labels_b)
    if sorted(ids_a) != sorted(ids_b):
        raise InputError("label files describe different curve id sets")
    lookup = dict(zip(ids_b, labels_b))
    aligned_b = [lookup[cid] for cid in ids_a]
    print(repr(float(ari(labels_a, aligned_b))))
    return 0


def _cmd_cpfreq(args) -> int:
    try:
        names = sorted(
            name for name in os.listdir(args.segments_dir) if name.endswith(".csv")
        )
    except OSError as exc:
        raise InputError(f"cannot list {args.segments_dir}: {exc}") from exc
    if not names:
        raise InputError(f"no .csv files under {args.segments_dir}")
    knot_sets = []
    for name in names:
        _ids, segs = _read_segments(os.path.join(args.segments_dir, name))
        knot_sets.extend(tuple(float(t) for t in seg.knots) for seg in segs)
    grid = args.grid_start + args.grid_step * np.arange(
        int(round((args.grid_stop - args.grid_start) / args.grid_step)) + 1
    )
    freqs = changepoint_frequencies(knot_sets, grid)
    rows = [[float(pos), float(f)] for pos, f in zip(grid, freqs)]
    write_table(rows, args.out, ["position", "frequency"])
    return 0


def _cmd_bench(args) -> int:
    defaults = {
        "model": 1,
        "sigmas": (1.0, 5.0),
        "replicates": 100,
        "n_curves": 100,
        "k_max": 10,
        "seed": None,
        "out_dir": None,
        "jitter": "verbatim",
        "threads": 1,
    }
    cli_values = {
        "model": args.model,
        "sigmas": _parse_sigmas(args.sigma) if args.sigma is not None else None,
        "replicates": args.reps,
        "n_curves": args.n_curves,
        "k_max": args.kmax,
        "seed": args.seed,
        "out_dir": args.out_dir,
        "jitter": args.jitter,
        "threads": args.threads,
    }
    resolved = _merge_config(defaults, args.config, cli_values)
    if resolved["seed"] is None:
        raise InputError("--seed is required for bench (set it on the CLI or in --config)")
    config = BenchConfig(**resolved)
    if config.out_dir is not None:
        os.makedirs(config.out_dir, exist_ok=True)
        echo = dict(resolved)
        echo["study"] = args.study
        _write_json_file(echo, os.path.join(config.out_dir, "config.resolved.json"))
    runner = run_ari_benchmark if args.study == "ari" else run_cp_study
    result = runner(config)
    print(json.dumps(result["summary"], sort_keys=True, indent=2))
    return 0


def _cmd_pipeline(args) -> int:
    config = _pipeline_config_from(args)
    dataset = load_dataset(args.input)
    result = run_pipeline(dataset, config)
    os.makedirs(args.out_dir, exist_ok=True)
    _write_segments(
        os.path.join(args.out_dir, "segments.csv"), result.ids, result.segmentations
    )
    _write_features(
        os.path.join(args.out_dir, "features.csv"),
        result.ids,
        [s.k_hat for s in result.segmentations],
        result.features,
        result.k_m,
    )
    _write_labels(os.path.join(args.out_dir, "labels.csv"), result.ids, result.labels)
    _write_kselection(
        os.path.join(args.out_dir, "kselection.json"), result.selection, result.partition.k
    )
    _write_json_file(
        config.to_dict(), os.path.join(args.out_dir, "config.resolved.json")
    )
    print(json.dumps(config.to_dict(), sort_keys=True))
    return 0


def _add_tf_flags(sub, with_threads=False):
    sub.add_argument("--kmax", type=int, default=None, help="candidate knot budget")
    sub.add_argument("--grid-size", type=int, default=None, help="lambda grid size")
    sub.add_argument("--eps-rel", type=float, default=None, help="kink detection threshold")
    sub.add_argument("--tol", type=float, default=None, help="solver stopping tolerance")
    sub.add_argument("--max-iter", type=int, default=None, help="solver iteration cap")
    if with_threads:
        sub.add_argument("--threads", type=int, default=None, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plfc",
        description="Piecewise-linear curve summarization and clustering.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="draw synthetic curves from model 1 or 2")
    p.add_argument("--model", required=True, help="1 or 2")
    p.add_argument("--sigma", type=float, required=True, help="noise level")
    p.add_argument("--n-curves", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="long CSV of curves")
    p.add_argument("--truth", default=None, help="optional CSV of generating parameters")
    p.add_argument("--jitter", choices=["verbatim", "symmetric"], default="verbatim")
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("fit", help="trend-filter each curve and mark candidate kinks")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    _add_tf_flags(p)
    p.set_defaults(func=_cmd_fit)

    p = subs.add_parser("segment", help="select change points for each curve")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--s", type=float, default=None, help="knot count threshold")
    _add_tf_flags(p, with_threads=True)
    p.set_defaults(func=_cmd_segment)

    p = subs.add_parser("featurize", help="build padded feature vectors from segments")
    p.add_argument("--segments", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_featurize)

    p = subs.add_parser("cluster", help="k-means with majority-vote cluster count")
    p.add_argument("--features", required=True)
    p.add_argument("--kmin", type=int, default=K_MIN_DEFAULT)
    p.add_argument("--kmax", type=int, default=K_MAX_DEFAULT)
    p.add_argument("--restarts", type=int, default=RESTARTS_DEFAULT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force-k", type=int, default=None, help="skip the vote, use this k")
    p.add_argument("--no-scale", action="store_true", help="cluster unscaled features")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cluster)

    p = subs.add_parser("ari", help="adjusted Rand index between two label files")
    p.add_argument("--labels-a", required=True)
    p.add_argument("--labels-b", required=True)
    p.set_defaults(func=_cmd_ari)

    p = subs.add_parser("cpfreq", help="per-position knot frequency across segment files")
    p.add_argument("--segments-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--grid-start", type=float, default=0.0)
    p.add_argument("--grid-stop", type=float, default=500.0)
    p.add_argument("--grid-step", type=float, default=10.0)
    p.set_defaults(func=_cmd_cpfreq)

    p = subs.add_parser("bench", help="run the seeded studies")
    bench_subs = p.add_subparsers(dest="study", required=True)
    for study in ("ari", "cp"):
        q = bench_subs.add_parser(study)
        q.add_argument("--model", default=None, help="1 or 2")
        q.add_argument("--sigma", default=None, help="comma-separated noise levels")
        q.add_argument("--reps", type=int, default=None)
        q.add_argument("--n-curves", type=int, default=None)
        q.add_argument("--kmax", type=int, default=None)
        q.add_argument("--seed", type=int, default=None)
        q.add_argument("--out-dir", default=None)
        q.add_argument("--jitter", choices=["verbatim", "symmetric"], default=None)
        q.add_argument("--threads", type=int, default=None)
        q.add_argument("--config", default=None, help="JSON file of config values")
        q.set_defaults(func=_cmd_bench)

    p = subs.add_parser("pipeline", help="segment, featurize, scale, and cluster")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--s", type=float, default=None, help="knot count threshold")
    _add_tf_flags(p, with_threads=True)
    p.add_argument("--cluster-kmin", type=int, default=None)
    p.add_argument("--cluster-kmax", type=int, default=None)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--force-k", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON file of config values")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def _blame(exc: BaseException) -> str:
    best = type(exc).__module__
    tb = exc.__traceback__
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("plfc"):
            best = name
        tb = tb.tb_next
    return best


def _fail(exc: BaseException, code: int) -> int:
    print(f"plfc: {_blame(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        return _fail(exc, 2)
    except (ConvergenceError, EmptySegmentError) as exc:
        return _fail(exc, 3)
    except (InvariantError, AssertionError) as exc:
        return _fail(exc, 4)
    except PlfcError as exc:
        return _fail(exc, 3)
    except OSError as exc:
        return _fail(exc, 2)
    except Exception as exc:  # noqa: BLE001  (internal bug surfaced with attribution)
        traceback.print_exc()
        return _fail(exc, 4)


if __name__ == "__main__":
    sys.exit(main())
