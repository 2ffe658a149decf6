"""Command-line front end: generate, train, evaluate, color.

Every experiment knob is a flag, all randomness flows from one ``--seed``,
and ``train`` writes a manifest that replays the run exactly. Exit codes:
0 success, 2 parse/validation error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .datagen import forward_sample, mask, replicate
from .errors import ParseError, SamGibbsError, ValidationError
from .metrics import avg_abs_error, kl_avg, predict_missing, roc_auc, throughput
from .model import DirichletPrior
from .network import color_graph, moralize
from .sampler import SamplerConfig, run


def _resolve_network_path(spec: str) -> Path:
    """A plain path, or the name of a bundled network like ``koller``."""
    path = Path(spec)
    if not path.exists() and "/" not in spec and not spec.endswith(".json"):
        return io.bundled_network_path(spec)
    return path


def _parse_schedule(text: str) -> tuple[tuple[int, int], ...]:
    """Parse an annealing schedule like ``1x50,5x150`` into (m, passes) pieces."""
    pieces = []
    for piece in text.split(","):
        try:
            m, passes = piece.strip().split("x")
            pieces.append((int(m), int(passes)))
        except ValueError as exc:
            raise ValueError(f"bad schedule piece {piece!r}, expected MxPASSES") from exc
    return tuple(pieces)


def cmd_generate(args: argparse.Namespace) -> int:
    net, cpts = io.load_network_file(_resolve_network_path(args.network))
    if cpts is None:
        raise ValidationError(f"{args.network}: network file has no cpts to sample from")
    data = forward_sample(net, cpts, args.cases, args.seed)
    if args.hide > 0:
        data = mask(data, args.hide, args.seed)
    if args.replicate_times > 1:
        data = replicate(data, args.replicate_times)
    io.write_data(args.out, data)
    print(
        f"wrote {args.out}: {data.num_vars} vars x {data.num_cases} cases, "
        f"{data.nnz} entries, density {data.density:.4f}"
    )
    return 0


def _train_manifest(args: argparse.Namespace) -> dict:
    return {
        "command": "train",
        "network": str(args.network),
        "data": str(args.data),
        "truth": str(args.truth) if args.truth else None,
        "same_m": args.same_m,
        "same_schedule": args.same_schedule,
        "minibatch_size": args.minibatch_size,
        "passes": args.passes,
        "alpha": args.alpha,
        "accumulator": args.accumulator,
        "exp_decay": args.exp_decay,
        "sweeps_per_minibatch": args.sweeps_per_minibatch,
        "map_estimate": args.map_estimate,
        "seed": args.seed,
        "threads": args.threads,
    }


def _apply_manifest(args: argparse.Namespace) -> None:
    manifest = io.read_manifest(args.from_manifest)
    if manifest.get("command") != "train":
        raise ParseError(f"{args.from_manifest}: not a train manifest")
    for key in (
        "network",
        "data",
        "truth",
        "same_m",
        "same_schedule",
        "minibatch_size",
        "passes",
        "alpha",
        "accumulator",
        "exp_decay",
        "sweeps_per_minibatch",
        "map_estimate",
        "seed",
        "threads",
    ):
        if key not in manifest:
            raise ParseError(f"{args.from_manifest}: manifest missing field {key!r}")
        setattr(args, key, manifest[key])
    if args.same_schedule is not None and not isinstance(args.same_schedule, str):
        args.same_schedule = ",".join(f"{m}x{p}" for m, p in args.same_schedule)


def cmd_train(args: argparse.Namespace) -> int:
    if args.from_manifest:
        _apply_manifest(args)
    if args.network is None or args.data is None:
        raise ValidationError("train needs --network and --data (or --from-manifest)")

    net, _ = io.load_network_file(_resolve_network_path(args.network))
    truth = None
    if args.truth:
        truth_net, truth = io.load_network_file(_resolve_network_path(args.truth))
        if truth is None:
            raise ValidationError(f"{args.truth}: truth file has no cpts")
        if truth_net.cardinalities != net.cardinalities or truth_net.parents != net.parents:
            raise ValidationError("truth network structure differs from --network")

    if args.same_schedule and args.same_m != 1:
        raise ValidationError("give either --same-m or --same-schedule, not both")
    same_m = _parse_schedule(args.same_schedule) if args.same_schedule else args.same_m
    cfg = SamplerConfig(
        same_m=same_m,
        minibatch_size=args.minibatch_size,
        num_passes=args.passes,
        prior=DirichletPrior(args.alpha),
        accumulator_mode="moving_sum" if args.accumulator == "moving" else "exponential",
        exp_decay=args.exp_decay,
        sweeps_per_minibatch=args.sweeps_per_minibatch,
        map_estimate=args.map_estimate,
        seed=args.seed,
    )
    source = io.FileSource(args.data, cfg.minibatch_size)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    started = time.perf_counter()
    cpts, trace = run(net, source, cfg, truth=truth, threads=args.threads)
    elapsed = time.perf_counter() - started

    io.write_network_file(out_dir / "cpts.json", net, cpts)
    io.write_trace(out_dir / "trace.csv", trace)
    io.write_manifest(out_dir / "manifest.json", _train_manifest(args))

    summary = {
        "elapsed_seconds": round(elapsed, 3),
        "passes": args.passes,
        "cases": source.num_cases,
    }
    if trace.records:
        summary["vars_per_sec_overall"] = throughput(trace).overall
        if truth is not None:
            summary["final_kl_avg"] = trace.records[-1].kl_avg
    print(json.dumps(summary))
    print(f"wrote {out_dir / 'cpts.json'}, {out_dir / 'trace.csv'}, {out_dir / 'manifest.json'}")
    return 0


def _read_score_dump(path: str) -> tuple[np.ndarray, np.ndarray]:
    scores = []
    labels = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line == "score,label":
                continue
            score, label = line.split(",")
            scores.append(float(score))
            labels.append(int(label))
    return np.asarray(scores), np.asarray(labels)


def cmd_evaluate(args: argparse.Namespace) -> int:
    if args.mode == "kl":
        if not (args.cpts and args.truth):
            raise ValidationError("kl mode needs --cpts and --truth")
        _, estimate = io.load_network_file(args.cpts)
        _, truth = io.load_network_file(_resolve_network_path(args.truth))
        if estimate is None or truth is None:
            raise ValidationError("kl mode needs cpts present in both files")
        report = {
            "kl_avg": kl_avg(truth, estimate),
            "avg_abs_error": avg_abs_error(truth, estimate),
        }
        print(json.dumps(report))
        return 0

    # roc mode: score a held-out entry set, or consume a prior score dump
    if args.scores:
        scores, labels = _read_score_dump(args.scores)
    else:
        if not (args.cpts and args.context and args.heldout):
            raise ValidationError("roc mode needs --scores, or --cpts/--context/--heldout")
        net, cpts = io.load_network_file(args.cpts)
        if cpts is None:
            raise ValidationError(f"{args.cpts}: file has no cpts")
        context = io.read_data(args.context)
        heldout = io.read_data(args.heldout)
        targets = list(zip(heldout.var_idx.tolist(), heldout.case_idx.tolist()))
        bad = [v for v, _ in targets if net.cardinalities[v] != 2]
        if bad:
            raise ValidationError(f"roc targets must be binary variables, got variable {bad[0]}")
        probs = predict_missing(
            net, cpts, context, targets, args.samples, args.seed, burn_in=args.burn_in
        )
        scores = probs[:, 1]
        labels = heldout.values.astype(np.int64)
        if args.dump_scores:
            with open(args.dump_scores, "w") as fh:
                fh.write("score,label\n")
                for score, label in zip(scores, labels):
                    fh.write(f"{score!r},{label}\n")

    curve = roc_auc(scores, labels)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("fpr,tpr\n")
            for fpr, tpr in curve.points:
                fh.write(f"{fpr!r},{tpr!r}\n")
            fh.write(f"auc,{curve.auc!r}\n")
    print(json.dumps({"auc": curve.auc, "points": len(curve.points)}))
    return 0


def cmd_color(args: argparse.Namespace) -> int:
    net, _ = io.load_network_file(_resolve_network_path(args.network))
    graph = moralize(net)
    coloring = color_graph(graph, args.seed)
    proper = all(coloring.colors[u] != coloring.colors[v] for u, v in graph.edges)
    print(f"colors {coloring.num_colors}")
    print("group_sizes " + ",".join(str(len(g)) for g in coloring.groups))
    print(f"proper {str(proper).lower()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="samegibbs",
        description="Replicated Gibbs CPT learning for discrete Bayesian networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="forward-sample, mask, and replicate a dataset")
    gen.add_argument("--network", required=True, help="network JSON with cpts (or a bundled name like 'koller')")
    gen.add_argument("--cases", type=int, required=True)
    gen.add_argument("--hide", type=float, default=0.0, help="fraction of entries to hide")
    gen.add_argument("--replicate-times", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output data file")
    gen.set_defaults(func=cmd_generate)

    train = sub.add_parser("train", help="stream a data file and learn CPTs")
    train.add_argument("--network")
    train.add_argument("--data")
    train.add_argument("--out", required=True, help="output directory")
    train.add_argument("--truth", help="network+cpts file for KL tracing")
    train.add_argument("--same-m", type=int, default=1, dest="same_m")
    train.add_argument("--same-schedule", dest="same_schedule", help="annealing schedule, e.g. 1x50,5x150")
    train.add_argument("--minibatch-size", type=int, default=1024)
    train.add_argument("--passes", type=int, default=1)
    train.add_argument("--alpha", type=float, default=1.0)
    train.add_argument("--accumulator", choices=("moving", "exp"), default="moving")
    train.add_argument("--exp-decay", type=float, default=1.0)
    train.add_argument("--sweeps-per-minibatch", type=int, default=1)
    train.add_argument("--map-estimate", action="store_true")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="sampler worker count; results never depend on it")
    train.add_argument("--from-manifest", help="replay a previous run's manifest")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("evaluate", help="compare CPTs or score held-out predictions")
    ev.add_argument("--mode", choices=("kl", "roc"), required=True)
    ev.add_argument("--cpts", help="estimated network+cpts file")
    ev.add_argument("--truth", help="true network+cpts file (kl mode)")
    ev.add_argument("--context", help="observed data file used as prediction context (roc mode)")
    ev.add_argument("--heldout", help="held-out entries with true states (roc mode)")
    ev.add_argument("--scores", help="pre-computed score,label CSV (roc mode)")
    ev.add_argument("--samples", type=int, default=200)
    ev.add_argument("--burn-in", type=int, default=10)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--dump-scores", help="write the score,label CSV here (roc mode)")
    ev.add_argument("--out", help="write fpr,tpr CSV here (roc mode)")
    ev.set_defaults(func=cmd_evaluate)

    col = sub.add_parser("color", help="report the moral-graph coloring")
    col.add_argument("--network", required=True)
    col.add_argument("--seed", type=int, default=0)
    col.set_defaults(func=cmd_color)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SamGibbsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
