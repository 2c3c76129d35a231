"""Command-line pipeline: encode, synth, pairs, tune, train, link, cluster,
eval, metrics, demo-stays, serve.

Each stage reads files written by the previous one, so every boundary is
auditable.  Exit codes: 0 success, 1 validation error (bad input, bad
flags), 2 internal error.  Every stage that uses randomness takes --seed;
stages with parallel work take --workers.  A --config file (flat KEY=VALUE
lines, # comments) supplies defaults that explicit flags override.

The encoding key comes from the HHLINK_KEY environment variable or a
--key-file; it is never written to any output, and manifests record only
its digest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import traceback
from pathlib import Path

import numpy as np

from . import adjudication, data_io, evaluate, hhsc_metrics, models, pairgen, synth, tuner
from .cluster import center_cluster, cluster_stats, merge_center_cluster, sort_edges
from .encoder import EncoderConfig, encode_profile
from .errors import HhlinkError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are validation errors (exit 1)
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _key_digest(key: bytes) -> str:
    return hashlib.sha256(key).hexdigest()[:16]


def load_key(args) -> bytes:
    if getattr(args, "key_file", None):
        key = Path(args.key_file).read_bytes().strip()
    else:
        env = os.environ.get("HHLINK_KEY", "")
        key = env.encode("utf-8")
    if not key:
        raise UsageError(
            "no encoding key: set the HHLINK_KEY environment variable or pass --key-file"
        )
    return key


def _apply_config(argv: list[str]) -> list[str]:
    """Inject KEY=VALUE pairs from --config as flags, unless already given."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    extra: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected KEY=VALUE")
            key, value = line.split("=", 1)
            flag = "--" + key.strip().replace("_", "-")
            if flag in rest:
                continue
            extra += [flag, value.strip()]
    return rest + extra


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    if args.roster:
        originals = data_io.read_profiles(args.roster)
    else:
        originals = synth.generate_roster(args.n_originals, args.seed)
    size_dist = (
        synth.read_size_distribution(args.size_dist)
        if args.size_dist
        else synth.default_size_distribution()
    )
    pattern_dist = (
        synth.read_pattern_distribution(args.patterns)
        if args.patterns
        else synth.default_pattern_distribution()
    )
    profiles, truth, stats = synth.generate_corpus(
        originals, size_dist, pattern_dist, args.seed
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data_io.write_profiles(out / "profiles.csv", profiles)
    data_io.write_truth(out / "truth.csv", truth)
    if not args.no_validate:
        stats["validation"] = synth.validate_corpus(
            profiles, truth, stats["original_of"]
        )
    data_io.write_report(out / "synth_stats.json", stats)
    inputs = [args.roster] if args.roster else []
    data_io.write_manifest(
        out,
        "synth",
        {
            "seed": args.seed,
            "n_originals": len(originals),
            "roster": bool(args.roster),
        },
        inputs,
        [out / "profiles.csv", out / "truth.csv", out / "synth_stats.json"],
    )
    print(f"wrote {len(profiles)} profiles in {len(truth)} clusters to {out}")
    return 0


def cmd_encode(args) -> int:
    key = load_key(args)
    cfg = EncoderConfig(key=key, m=args.m, k=args.k)
    profiles = data_io.read_profiles(args.profiles)
    encoded = [encode_profile(p, cfg) for p in profiles]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    data_io.write_encoded(out, encoded)
    data_io.write_manifest(
        out.parent,
        "encode",
        {"m": args.m, "k": args.k, "key_digest": _key_digest(key)},
        [args.profiles],
        [out],
    )
    print(f"encoded {len(encoded)} profiles at m={args.m} to {out}")
    return 0


def cmd_pairs(args) -> int:
    encoded = data_io.read_encoded(args.encoded)
    if args.truth:
        truth = data_io.read_truth(args.truth)
        table = pairgen.labeled_candidates(
            encoded, truth, floor=args.floor, workers=args.workers,
            block_size=args.block_size,
        )
    else:
        table = pairgen.compare_all(
            encoded, floor=args.floor, workers=args.workers, block_size=args.block_size
        )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    data_io.write_pairs(out, table)
    inputs = [args.encoded] + ([args.truth] if args.truth else [])
    data_io.write_manifest(
        out.parent,
        "pairs",
        {"floor": args.floor, "block_size": args.block_size},
        inputs,
        [out],
    )
    print(f"wrote {len(table)} candidate pairs to {out}")
    return 0


def _load_table(args, need_labels: bool) -> pairgen.PairTable:
    table = data_io.read_pairs(args.pairs)
    if need_labels and table.labels is None:
        raise UsageError(f"{args.pairs} has no label column; run pairs with --truth")
    return table


def _subset_for_role(table: pairgen.PairTable, args) -> pairgen.PairTable:
    if getattr(args, "subset", "all") == "all":
        return table
    train, test = pairgen.stratified_split(table, args.train_fraction, args.split_seed)
    return train if args.subset == "train" else test


def cmd_tune(args) -> int:
    table = _subset_for_role(_load_table(args, need_labels=True), args)
    if args.grid:
        with open(args.grid, encoding="utf-8") as fh:
            grid = tuner.Grid(args.model, json.load(fh))
    else:
        grid = tuner.default_grid(args.model)
    print(
        f"grid search: {grid.combination_count()} combinations x {args.folds} folds "
        f"on {len(table)} pairs"
    )
    result = tuner.grid_search(table, grid, folds=args.folds, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    data_io.write_report(out, result.report())
    data_io.write_manifest(
        out.parent,
        "tune",
        {
            "model": args.model,
            "folds": args.folds,
            "seed": args.seed,
            "subset": args.subset,
        },
        [args.pairs] + ([args.grid] if args.grid else []),
        [out],
    )
    print(f"winner: {result.best} (decided by {result.tie_break})")
    return 0


def cmd_train(args) -> int:
    table = _subset_for_role(_load_table(args, need_labels=True), args)
    if args.from_tuning:
        report = data_io.read_report(args.from_tuning)
        if report.get("model_type") != args.model:
            raise UsageError(
                f"tuning report is for {report.get('model_type')!r}, not {args.model!r}"
            )
        hp = report["winner"]["hyperparameters"]
    elif args.hyperparams:
        with open(args.hyperparams, encoding="utf-8") as fh:
            hp = json.load(fh)
    elif args.model == "threshold":
        hp = {"beta": args.beta}
    else:
        hp = {}
    model = tuner.train_model(args.model, hp, table, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    models.save_model(model, out, digest=models.training_digest(table))
    inputs = [args.pairs]
    if args.from_tuning:
        inputs.append(args.from_tuning)
    if args.hyperparams:
        inputs.append(args.hyperparams)
    data_io.write_manifest(
        out.parent,
        "train",
        {
            "model": args.model,
            "seed": args.seed,
            "subset": args.subset,
            "hyperparameters": hp,
        },
        inputs,
        [out],
    )
    print(f"trained {args.model} model on {len(table)} pairs -> {out}")
    return 0


def cmd_link(args) -> int:
    model = models.load_model(args.model)
    if args.pairs:
        table = data_io.read_pairs(args.pairs)
        inputs = [args.model, args.pairs]
    elif args.encoded:
        encoded = data_io.read_encoded(args.encoded)
        table = pairgen.compare_all(
            encoded, floor=args.floor, workers=args.workers, block_size=args.block_size
        )
        inputs = [args.model, args.encoded]
    else:
        raise UsageError("link needs --pairs or --encoded")
    decisions, confidence = models.predict_table(model, table.features)
    idx = np.flatnonzero(decisions)
    edges = [
        (table.id_a[i], table.id_b[i], float(confidence[i])) for i in idx
    ]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    from .cluster import LinkEdge

    data_io.write_links(out, [LinkEdge(a, b, w) for a, b, w in edges])
    data_io.write_manifest(
        out.parent,
        "link",
        {"floor": args.floor},
        inputs,
        [out],
    )
    print(f"accepted {len(edges)} links out of {len(table)} pairs -> {out}")
    return 0


def cmd_cluster(args) -> int:
    encoded = data_io.read_encoded(args.encoded)
    ids = [e.profile_id for e in encoded]
    edges = sort_edges(data_io.read_links(args.links))
    algo = center_cluster if args.algo == "center" else merge_center_cluster
    clustering = algo(ids, edges)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    data_io.write_clusters(out, clustering)
    data_io.write_manifest(
        out.parent,
        "cluster",
        {"algo": args.algo},
        [args.encoded, args.links],
        [out],
    )
    stats = cluster_stats(clustering)
    print(
        f"{args.algo}: {stats['cluster_count']} clusters over "
        f"{stats['profile_count']} profiles -> {out}"
    )
    return 0


def cmd_eval(args) -> int:
    report: dict = {}
    inputs: list = []
    if args.pairs and args.model:
        table = _subset_for_role(_load_table(args, need_labels=True), args)
        model = models.load_model(args.model)
        decisions, _ = models.predict_table(model, table.features)
        pm = evaluate.pair_metrics(decisions, table.labels)
        report["pairwise"] = {
            "pairs": len(table),
            "positives": table.positive_count,
            "subset": args.subset,
            **pm.to_dict(),
        }
        inputs += [args.pairs, args.model]
    if args.clusters:
        clustering = data_io.read_clusters(args.clusters)
        report["cluster_stats"] = cluster_stats(clustering)
        inputs.append(args.clusters)
        if args.truth:
            truth = data_io.read_truth(args.truth)
            cm = evaluate.cluster_metrics(truth, clustering)
            report["cluster"] = {
                "truth_clusters": len(truth),
                "mean_precision": cm.mean_precision,
                "mean_recall": cm.mean_recall,
                "f1": cm.f1,
            }
            if args.per_cluster:
                report["cluster"]["per_cluster"] = cm.per_cluster
            inputs.append(args.truth)
    if not report:
        raise UsageError("eval needs --pairs with --model, or --clusters (or both)")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    data_io.write_report(out, report)
    data_io.write_manifest(
        out.parent, "eval", {"subset": getattr(args, "subset", "all")}, inputs, [out]
    )
    for section in ("pairwise", "cluster"):
        if section in report:
            r = report[section]
            print(
                f"{section}: precision={r.get('precision', r.get('mean_precision')):.4f} "
                f"recall={r.get('recall', r.get('mean_recall')):.4f} f1={r['f1']:.4f}"
            )
    return 0


def cmd_metrics(args) -> int:
    stays = data_io.read_stays(args.stays)
    clustering = data_io.read_clusters(args.clusters) if args.clusters else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report: dict = {}
    merged_usages = hhsc_metrics.all_usages(stays, clustering, args.inclusive_tenure)
    report["merged" if clustering else "unmerged"] = hhsc_metrics.cohort_report(
        merged_usages, percent=args.top_percent
    )
    if clustering is not None:
        unmerged = hhsc_metrics.all_usages(stays, None, args.inclusive_tenure)
        report["unmerged"] = hhsc_metrics.cohort_report(unmerged, percent=args.top_percent)
    data_io.write_report(out / "usage_report.json", report)
    eps = [
        ep
        for person, stay_set in sorted(hhsc_metrics.merge_stays(stays, clustering).items())
        for ep in hhsc_metrics.episodes(person, stay_set)
    ]
    hist = hhsc_metrics.episode_length_histogram(eps)
    with open(out / "episode_hist.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("stays,episodes\n")
        for k, v in hist.items():
            fh.write(f"{k},{v}\n")
    inputs = [args.stays] + ([args.clusters] if args.clusters else [])
    data_io.write_manifest(
        out,
        "metrics",
        {
            "inclusive_tenure": args.inclusive_tenure,
            "top_percent": args.top_percent,
        },
        inputs,
        [out / "usage_report.json", out / "episode_hist.csv"],
    )
    print(f"usage report for {len(merged_usages)} persons -> {out}")
    return 0


def cmd_demo_stays(args) -> int:
    if args.profiles:
        ids = [p.profile_id for p in data_io.read_profiles(args.profiles)]
        src = args.profiles
    elif args.encoded:
        ids = [e.profile_id for e in data_io.read_encoded(args.encoded)]
        src = args.encoded
    else:
        raise UsageError("demo-stays needs --profiles or --encoded")
    stays = hhsc_metrics.generate_stays(ids, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    data_io.write_stays(out, stays)
    data_io.write_manifest(
        out.parent, "demo-stays", {"seed": args.seed}, [src], [out]
    )
    print(f"wrote {len(stays)} synthetic stays for {len(ids)} profiles -> {out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    profiles = data_io.read_profiles(args.profiles)
    service = adjudication.AdjudicationService(
        profiles, args.decisions, seed=args.seed, lease_seconds=args.lease_seconds
    )
    app = adjudication.create_app(service, ui_dir=args.ui_dir)
    print(f"serving {len(profiles)} profiles on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="hhlink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_split_flags(p):
        p.add_argument("--subset", choices=["all", "train", "test"], default="all",
                       help="evaluate/train on a stratified subset of the pairs file")
        p.add_argument("--train-fraction", type=float, default=0.7)
        p.add_argument("--split-seed", type=int, default=0)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--roster", help="clean base roster CSV (defaults to the bundled generator)")
    p.add_argument("--n-originals", type=int, default=4750)
    p.add_argument("--size-dist", help="cluster size distribution CSV")
    p.add_argument("--patterns", help="error pattern distribution CSV")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-validate", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", help="encode plaintext profiles into bit vectors")
    p.add_argument("--profiles", required=True)
    p.add_argument("--m", type=int, default=64, choices=[32, 64])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--key-file", help="file holding the secret key (else env HHLINK_KEY)")
    p.add_argument("--out", required=True, help="encoded.jsonl path")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("pairs", help="score all profile pairs above the floor")
    p.add_argument("--encoded", required=True)
    p.add_argument("--truth", help="label pairs against this ground truth")
    p.add_argument("--floor", type=float, default=pairgen.DEFAULT_FLOOR)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--block-size", type=int, default=pairgen.DEFAULT_BLOCK_SIZE)
    p.add_argument("--out", required=True, help="pairs.csv path")
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("tune", help="grid search with cross-validation")
    p.add_argument("--model", required=True, choices=list(tuner.MODEL_TYPES))
    p.add_argument("--pairs", required=True, help="labeled pairs.csv")
    p.add_argument("--grid", help="JSON file {axis: [values]}; defaults per model")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    add_split_flags(p)
    p.add_argument("--out", required=True, help="tuning_report.json path")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("train", help="train one model")
    p.add_argument("--model", required=True, choices=list(tuner.MODEL_TYPES))
    p.add_argument("--pairs", required=True, help="labeled pairs.csv")
    p.add_argument("--hyperparams", help="JSON file of hyperparameters")
    p.add_argument("--from-tuning", help="tuning_report.json to take the winner from")
    p.add_argument("--beta", type=float, default=0.75,
                   help="threshold model cut (when no other hyperparameters given)")
    p.add_argument("--seed", type=int, default=0)
    add_split_flags(p)
    p.add_argument("--out", required=True, help="model.json path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("link", help="apply a model, keep accepted pairs as links")
    p.add_argument("--model", required=True, help="model.json")
    p.add_argument("--pairs", help="pairs.csv to score")
    p.add_argument("--encoded", help="encoded.jsonl to compare and score directly")
    p.add_argument("--floor", type=float, default=pairgen.DEFAULT_FLOOR)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--block-size", type=int, default=pairgen.DEFAULT_BLOCK_SIZE)
    p.add_argument("--out", required=True, help="links.csv path")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("cluster", help="resolve persons on the link graph")
    p.add_argument("--links", required=True, help="links.csv")
    p.add_argument("--encoded", required=True, help="encoded.jsonl giving the full node set")
    p.add_argument("--algo", choices=["center", "merge-center"], default="merge-center")
    p.add_argument("--out", required=True, help="clusters.csv path")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", help="pairwise and cluster metrics against ground truth")
    p.add_argument("--pairs", help="labeled pairs.csv")
    p.add_argument("--model", help="model.json for pairwise metrics")
    p.add_argument("--clusters", help="clusters.csv")
    p.add_argument("--truth", help="truth.csv")
    p.add_argument("--per-cluster", action="store_true",
                   help="include per-ground-truth-cluster rows")
    add_split_flags(p)
    p.add_argument("--out", required=True, help="eval_report.json path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("metrics", help="shelter utilization metrics")
    p.add_argument("--stays", required=True, help="stays.csv")
    p.add_argument("--clusters", help="clusters.csv (omit for per-profile metrics)")
    p.add_argument("--inclusive-tenure", action="store_true")
    p.add_argument("--top-percent", type=float, default=5.0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("demo-stays", help="generate synthetic stay records")
    p.add_argument("--profiles", help="profiles.csv to draw ids from")
    p.add_argument("--encoded", help="encoded.jsonl to draw ids from")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="stays.csv path")
    p.set_defaults(func=cmd_demo_stays)

    p = sub.add_parser("serve", help="run the adjudication service")
    p.add_argument("--profiles", required=True, help="plaintext profiles.csv")
    p.add_argument("--decisions", required=True, help="append-only decision log (ndjson)")
    p.add_argument("--port", type=int, default=8348)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lease-seconds", type=float, default=adjudication.DEFAULT_LEASE_SECONDS)
    p.add_argument("--ui-dir", help="directory of built UI assets to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (HhlinkError, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
