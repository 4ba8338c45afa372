"""Command-line interface.

Subcommands cover the full pipeline: gen-synthetic -> train -> encode ->
index -> query/eval, plus stats (pairwise MI dump), simulate-convergence
(the slack-variable recursion) and scatter (the MI-only code-spreading
experiment).  Every failure raised as a MihashError exits with status 2
and a single "error: ..." line on stderr.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import convergence, encoder, io_formats, mutual_info, retrieval
from . import synthetic, training
from .errors import ConfigError, FormatError, MihashError
from .tensor import SeededRng


def _parse_overrides(pairs):
    overrides = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _write_csv(path, header, rows):
    out = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(out)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()


def _save_split(feats, labels, feats_path, labels_path, id_base=0):
    io_formats.save_features(feats, feats_path)
    if labels_path:
        ids = [str(id_base + i) for i in range(feats.shape[0])]
        sets = [frozenset([str(int(c))]) for c in labels]
        io_formats.save_labels(ids, sets, labels_path)
    print(f"wrote {feats.shape[0]} x {feats.shape[1]} features to "
          f"{feats_path}")


def _cmd_gen_synthetic(args):
    if args.holdout and not args.holdout_out:
        raise ConfigError("--holdout needs --holdout-out")
    rng = SeededRng(args.seed)
    total = args.n + args.holdout
    if args.paired:
        feats, labels = synthetic.paired_clusters(
            total, args.dim, args.clusters, rng,
            base_scale=args.center_scale, pair_offset=args.pair_offset,
            noise=args.noise)
    else:
        feats, labels = synthetic.gaussian_clusters(
            total, args.dim, args.clusters, rng,
            center_scale=args.center_scale, noise=args.noise)
    _save_split(feats[:args.n], labels[:args.n], args.out, args.labels_out)
    if args.holdout:
        # tail rows share the same cluster centers: an honest query split
        _save_split(feats[args.n:], labels[args.n:], args.holdout_out,
                    args.holdout_labels_out, id_base=args.n)
    return 0


def _cmd_train(args):
    features = io_formats.load_features(args.features)
    config = io_formats.parse_config(args.config, _parse_overrides(args.set))
    model = encoder.init_model(features.shape[1], config.code_len,
                               SeededRng(config.seed))
    model, log = training.train(model, features, config)
    io_formats.save_model(model.weights, model.bias, args.out_model)
    if args.log:
        header = ["epoch", "lr", "L_m", "L_sim", "L_reg", "distinct_codes"]
        _write_csv(args.log, header,
                   [[row[key] for key in header] for row in log])
    if log:
        last = log[-1]
        print(f"epoch {last['epoch']}: L_m={last['L_m']:.6f} "
              f"L_sim={last['L_sim']:.6f} L_reg={last['L_reg']:.6f} "
              f"distinct={last['distinct_codes']}")
    print(f"wrote model to {args.out_model}")
    return 0


def _cmd_encode(args):
    features = io_formats.load_features(args.features)
    weights, bias = io_formats.load_model(args.model)
    model = encoder.HashModel(weights, bias)
    _, codes = encoder.forward(model, features)
    io_formats.save_codes(encoder.pack(codes), args.out)
    print(f"wrote {codes.shape[0]} codes ({codes.shape[1]} bits) to {args.out}")
    return 0


def _cmd_index(args):
    packed = io_formats.load_codes(args.codes)
    if args.labels:
        ids, labels = io_formats.load_labels(args.labels)
    else:
        ids, labels = [str(i) for i in range(packed.n)], None
    io_formats.save_index(packed, ids, labels, args.out)
    print(f"wrote index of {packed.n} entries to {args.out}")
    return 0


def _cmd_query(args):
    packed, ids, labels = io_formats.load_index(args.index)
    index = retrieval.HammingIndex(packed, ids, labels)
    queries = io_formats.load_codes(args.queries)
    if queries.k != packed.k:
        raise FormatError("query code length does not match index")
    rows = []
    any_truncated = False
    for qi in range(queries.n):
        got_ids, dists, truncated = retrieval.query_topk(
            index, queries.words[qi], args.k)
        any_truncated = any_truncated or truncated
        for rank, (sample_id, dist) in enumerate(zip(got_ids, dists), 1):
            rows.append([qi, rank, sample_id, int(dist)])
    _write_csv(args.out, ["query", "rank", "id", "distance"], rows)
    if any_truncated:
        print("warning: k exceeds database size; results truncated",
              file=sys.stderr)
    return 0


def _cmd_eval(args):
    packed, ids, labels = io_formats.load_index(args.index)
    if labels is None:
        raise FormatError("eval needs an index built with labels")
    index = retrieval.HammingIndex(packed, ids, labels)
    queries = io_formats.load_codes(args.queries)
    if queries.k != packed.k:
        raise FormatError("query code length does not match index")
    _, query_labels = io_formats.load_labels(args.query_labels)
    if len(query_labels) != queries.n:
        raise FormatError("query label count does not match query codes")
    score = retrieval.map_at_k(index, queries, query_labels, args.k)
    _write_csv(args.out, ["metric", "value"],
               [["map_at_k", repr(score)], ["k", args.k]])
    print(f"MAP@{args.k} = {score:.6f}")
    if args.pr_out:
        points = retrieval.pr_curve(index, queries, query_labels)
        _write_csv(args.pr_out, ["rank", "recall", "precision"],
                   [[rank, repr(r), repr(p)]
                    for rank, (r, p) in enumerate(points, 1)])
    if args.util_out:
        codes = encoder.unpack(packed)
        hist = retrieval.utilization_histogram(codes)
        _write_csv(args.util_out, ["code", "count"],
                   [[key, count] for key, count in hist])
    return 0


def _cmd_stats(args):
    packed = io_formats.load_codes(args.codes)
    codes = encoder.unpack(packed)
    stats = mutual_info.estimate_stats(codes)
    report = mutual_info.mi_report(stats)
    rows = []
    k = stats.marginals.shape[0]
    for i in range(k):
        for j in range(i + 1, k):
            cells = stats.joints[i, j]
            rows.append([i, j] + [repr(float(c)) for c in cells]
                        + [repr(float(report.per_pair[i, j]))])
    _write_csv(args.out, ["i", "j", "p_pp", "p_pn", "p_np", "p_nn", "mi"],
               rows)
    if args.marginals_out:
        _write_csv(args.marginals_out, ["i", "p_plus"],
                   [[i, repr(float(p))] for i, p in enumerate(stats.marginals)])
    print(f"total_mi={report.total!r}")
    return 0


def _cmd_simulate_convergence(args):
    if args.schedule == "harmonic":
        schedule = convergence.harmonic_schedule(args.eta0)
    else:
        schedule = convergence.constant_schedule(args.eta0)
    trace = convergence.simulate_slack(
        args.joint, (args.p_i, args.p_j), schedule, args.steps,
        coupling=args.coupling)
    clamped = set(trace.clamp_steps)
    rows = [[t, repr(float(trace.lr_series[t])),
             repr(float(trace.epsilon_series[t + 1])),
             repr(float(trace.delta_i_series[t])),
             repr(float(trace.delta_j_series[t])),
             int(t in clamped)]
            for t in range(trace.steps)]
    _write_csv(args.out,
               ["step", "eta", "epsilon_after", "delta_i_abs", "delta_j_abs",
                "clamped"], rows)
    print(f"epsilon_init={float(trace.epsilon_series[0])!r} "
          f"epsilon_final={float(trace.epsilon_series[-1])!r} "
          f"clamps={len(trace.clamp_steps)}")
    return 0


def _cmd_scatter(args):
    features = io_formats.load_features(args.features)
    config = training.TrainConfig(code_len=args.code_len, lr=args.lr,
                                  beta=args.beta, seed=args.seed)
    frames = convergence.scatter_experiment(features, config,
                                            steps=args.steps,
                                            margin=args.margin)
    for frame in frames:
        path = f"{args.out_prefix}{frame.step:03d}.csv"
        _write_csv(path, ["x", "y"],
                   [[int(x), int(y)] for x, y in frame.points])
        print(f"{frame.step},{convergence.distinct_points(frame)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mihash",
        description="Unsupervised binary hashing with an MI shuffle step.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="write a synthetic feature file")
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out", default=None)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--clusters", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--center-scale", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.35)
    p.add_argument("--paired", action="store_true",
                   help="draw clusters as close sibling pairs")
    p.add_argument("--pair-offset", type=float, default=0.25)
    p.add_argument("--holdout", type=int, default=0,
                   help="extra rows written to a second file pair, drawn "
                        "from the same clusters (query split)")
    p.add_argument("--holdout-out", default=None)
    p.add_argument("--holdout-labels-out", default=None)
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("train", help="fit a hash model to a feature file")
    p.add_argument("--features", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config value (repeatable)")
    p.add_argument("--out-model", required=True)
    p.add_argument("--log", default=None, help="per-epoch CSV log path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("encode", help="apply a model to features")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("index", help="bundle codes (+labels) into an index")
    p.add_argument("--codes", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("query", help="top-k lookup against an index")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", default="-", help="CSV path (default stdout)")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("eval", help="MAP@k / PR / utilization report")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--query-labels", required=True)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--out", default="-")
    p.add_argument("--pr-out", default=None)
    p.add_argument("--util-out", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("stats", help="dump pairwise joints and MI as CSV")
    p.add_argument("--codes", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--marginals-out", default=None)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("simulate-convergence",
                       help="run the slack-variable recursion")
    p.add_argument("--joint", type=float, required=True)
    p.add_argument("--p-i", type=float, required=True)
    p.add_argument("--p-j", type=float, required=True)
    p.add_argument("--schedule", choices=("harmonic", "constant"),
                   default="harmonic")
    p.add_argument("--eta0", type=float, default=0.01)
    p.add_argument("--coupling", type=float, default=0.1)
    p.add_argument("--steps", type=int, default=10000)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_simulate_convergence)

    p = sub.add_parser("scatter", help="MI-only code-spreading frames")
    p.add_argument("--features", required=True)
    p.add_argument("--code-len", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--margin", type=float, default=0.01)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_scatter)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MihashError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
