"""Command-line surface: build-graphs, train, evaluate, ablate.

Every command writes a run manifest describing the exact inputs consumed
(by digest), the config, and the outputs produced, so runs are
reproducible from the manifest alone. Errors print one machine-parsable
line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .corpus import CorpusError, load_corpus, load_embeddings
from .graphs import (GraphConfig, build_view_graphs, config_hash, file_sha256,
                     load_bundle, save_bundle)
from .losses import PAIR_LABELS
from .model import load_checkpoint, rebuild_params, save_checkpoint
from .training import LabelIndex, TrainConfig, evaluate, run_ablation, train

LABEL_TO_PAIR = {v: k for k, v in PAIR_LABELS.items()}


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _atomic_write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def parse_pair_set(spec):
    """Parse "wp,we,pe" (or "" for none) into canonical view pairs."""
    spec = spec.strip()
    if not spec:
        return ()
    pairs = []
    for token in spec.split(","):
        token = token.strip()
        if token not in LABEL_TO_PAIR:
            raise CliError("bad-pair-set",
                           f"unknown pair {token!r} (expected wp, we, pe)")
        pairs.append(LABEL_TO_PAIR[token])
    if len(set(pairs)) != len(pairs):
        raise CliError("bad-pair-set", "duplicate pair in --pair-set")
    return tuple(pairs)


def _add_train_flags(p):
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--hidden-dim", type=int, default=128)
    p.add_argument("--proj-dim", type=int, default=128)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--max-epochs", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pair-set", default="wp,we,pe",
                   help='comma-separated subset of wp,we,pe; "" disables CL')
    p.add_argument("--count-ordered-pairs", action="store_true")
    p.add_argument("--ce-reduction", choices=("mean", "sum"), default="mean")
    p.add_argument("--early-stop-metric", choices=("val_ce", "val_total"),
                   default="val_ce")
    p.add_argument("--gcn-final-activation", choices=("linear", "relu"),
                   default="linear")
    p.add_argument("--per-view-projection", action="store_true")


def _train_config(args):
    return TrainConfig(
        learning_rate=args.lr,
        max_epochs=args.max_epochs,
        patience=args.patience,
        tau=args.tau,
        hidden_dim=args.hidden_dim,
        proj_dim=args.proj_dim,
        seed=args.seed,
        pair_set=parse_pair_set(args.pair_set),
        count_ordered_pairs=args.count_ordered_pairs,
        ce_reduction=args.ce_reduction,
        early_stop_metric=args.early_stop_metric,
        gcn_final_activation=args.gcn_final_activation,
        per_view_projection=args.per_view_projection,
    )


def _write_run_manifest(out_dir, command, config, input_digests, outputs):
    manifest = {
        "tool": "simstc",
        "version": __version__,
        "command": command,
        "config": config,
        "input_digests": input_digests,
        "outputs": sorted(outputs),
    }
    _atomic_write_text(os.path.join(out_dir, "run_manifest.json"),
                       json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# -- subcommands -------------------------------------------------------------


def cmd_build_graphs(args):
    if not os.path.exists(args.corpus):
        raise CliError("missing-input", f"corpus file not found: {args.corpus}")
    if not os.path.exists(args.entity_embeddings):
        raise CliError("missing-input",
                       f"--entity-embeddings file not found: {args.entity_embeddings}")
    if args.word_embeddings and not os.path.exists(args.word_embeddings):
        raise CliError("missing-input",
                       f"--word-embeddings file not found: {args.word_embeddings}")

    corpus = load_corpus(args.corpus, min_word_freq=args.min_word_freq,
                         stopword_path=args.stopwords)
    entity_table = load_embeddings(args.entity_embeddings, corpus.entity_vocab)
    word_table = None
    if args.word_embeddings:
        word_table = load_embeddings(args.word_embeddings, corpus.word_vocab)

    gcfg = GraphConfig(window_size=args.window_size, word_dim=args.word_dim,
                       tfidf_variant=args.tfidf_variant, seed=args.seed)
    mv = build_view_graphs(corpus, entity_table, word_table, gcfg)
    for ent in mv.dropped_entities:
        print(f"warning: entity {ent!r} has no embedding; dropped", file=sys.stderr)

    input_digests = {args.corpus: file_sha256(args.corpus),
                     args.entity_embeddings: file_sha256(args.entity_embeddings)}
    if args.word_embeddings:
        input_digests[args.word_embeddings] = file_sha256(args.word_embeddings)
    config_echo = {
        "window_size": gcfg.window_size,
        "word_dim": gcfg.word_dim,
        "tfidf_variant": gcfg.tfidf_variant,
        "seed": gcfg.seed,
        "min_word_freq": args.min_word_freq,
        "stopwords": bool(args.stopwords),
        "input_digests": input_digests,
    }
    manifest = save_bundle(args.out, corpus, mv, config_echo, input_digests)
    outputs = list(manifest["file_sha256"]) + ["manifest.json"]
    _write_run_manifest(args.out, "build-graphs", config_echo, input_digests,
                        outputs)
    print(json.dumps({
        "bundle": args.out,
        "config_hash": manifest["config_hash"],
        "num_docs": corpus.N,
        "views": {v: manifest["views"][v]["nodes"] for v in manifest["views"]},
        "dropped_entities": len(mv.dropped_entities),
    }, sort_keys=True))
    return 0


def cmd_train(args):
    bundle = load_bundle(args.bundle, verify=True)
    config = _train_config(args)
    index = LabelIndex.from_bundle(bundle)
    os.makedirs(args.out, exist_ok=True)

    metrics_path = os.path.join(args.out, "metrics.jsonl")
    tmp_metrics = metrics_path + ".tmp"
    lines = []

    def on_epoch(rec):
        lines.append(json.dumps(rec.to_dict(), sort_keys=True))

    result = train(index, bundle.graphs, bundle.links, config, epoch_cb=on_epoch)
    with open(tmp_metrics, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp_metrics, metrics_path)

    config_echo = config.to_dict()
    bundle_hash = bundle.manifest["config_hash"]
    run_hash = config_hash({"train": config_echo, "bundle": bundle_hash})

    ckpt_path = os.path.join(args.out, "checkpoint.bin")
    save_checkpoint(ckpt_path, result.params, meta={
        "seed": config.seed, "config": config_echo,
        "config_hash": run_hash, "bundle_hash": bundle_hash,
    })

    test_report = evaluate(result.params, index, bundle.graphs, bundle.links,
                           "test", config)
    summary = {
        "test_accuracy": test_report.accuracy,
        "test_macro_f1": test_report.macro_f1,
        "best_epoch": result.best_epoch,
        "best_val": result.best_val,
        "epochs_run": len(result.records),
        "config": config_echo,
        "config_hash": run_hash,
        "bundle_hash": bundle_hash,
    }
    _atomic_write_text(os.path.join(args.out, "result.json"),
                       json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _write_run_manifest(args.out, "train", config_echo,
                        {"bundle": bundle_hash},
                        ["metrics.jsonl", "checkpoint.bin", "result.json"])
    print(json.dumps({"out": args.out, "best_epoch": result.best_epoch,
                      "test_accuracy": test_report.accuracy,
                      "test_macro_f1": test_report.macro_f1}, sort_keys=True))
    return 0


def cmd_evaluate(args):
    bundle = load_bundle(args.bundle, verify=True)
    values, header = load_checkpoint(args.checkpoint)
    if header["meta"].get("bundle_hash") != bundle.manifest["config_hash"]:
        raise CliError("bundle-mismatch",
                       "checkpoint was trained on a different bundle")
    view_dims = {v: bundle.graphs[v].features.shape[1] for v in bundle.graphs}
    params = rebuild_params(values, header, view_dims, bundle.num_classes)
    index = LabelIndex.from_bundle(bundle)
    report = evaluate(params, index, bundle.graphs, bundle.links, args.split)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return 0


def cmd_ablate(args):
    bundle = load_bundle(args.bundle, verify=True)
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
    except ValueError as e:
        raise CliError("bad-seeds", f"--seeds must be integers: {e}") from e
    if not seeds:
        raise CliError("bad-seeds", "--seeds must name at least one seed")
    config = _train_config(args)
    index = LabelIndex.from_bundle(bundle)
    table = run_ablation(index, bundle.graphs, bundle.links, config, seeds)

    os.makedirs(args.out, exist_ok=True)
    _atomic_write_text(os.path.join(args.out, "ablation.json"),
                       json.dumps({"seeds": seeds, "rows": table},
                                  indent=2, sort_keys=True) + "\n")

    csv_path = os.path.join(args.out, "ablation.csv")
    tmp = csv_path + ".tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["word_tag", "tag_entity", "word_entity"]
        for s in seeds:
            header += [f"acc_seed{s}", f"f1_seed{s}"]
        header += ["mean_acc", "std_acc", "mean_f1", "std_f1"]
        writer.writerow(header)
        for row in table:
            cells = [("x" if row["word_tag"] else "-"),
                     ("x" if row["tag_entity"] else "-"),
                     ("x" if row["word_entity"] else "-")]
            for run in row["runs"]:
                cells += [f"{run['accuracy']:.4f}", f"{run['macro_f1']:.4f}"]
            cells += [f"{row['mean_accuracy']:.4f}", f"{row['std_accuracy']:.4f}",
                      f"{row['mean_macro_f1']:.4f}", f"{row['std_macro_f1']:.4f}"]
            writer.writerow(cells)
    os.replace(tmp, csv_path)

    _write_run_manifest(args.out, "ablate", config.to_dict(),
                        {"bundle": bundle.manifest["config_hash"],
                         "seeds": seeds},
                        ["ablation.json", "ablation.csv"])
    for row in table:
        marks = "".join("x" if row[k] else "-" for k in
                        ("word_tag", "tag_entity", "word_entity"))
        print(f"{marks}  acc {row['mean_accuracy']:.4f} +/- "
              f"{row['std_accuracy']:.4f}  f1 {row['mean_macro_f1']:.4f} +/- "
              f"{row['std_macro_f1']:.4f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="simstc",
        description="Multi-view graph contrastive training engine for "
                    "short-text classification")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graphs", help="build the three-view graph bundle")
    p.add_argument("corpus", help="JSON-Lines corpus file")
    p.add_argument("--entity-embeddings", required=True,
                   help="entity embedding file (token v1 ... vd per line)")
    p.add_argument("--word-embeddings", default=None)
    p.add_argument("--out", required=True, help="bundle output directory")
    p.add_argument("--window-size", type=int, default=5)
    p.add_argument("--min-word-freq", type=int, default=5)
    p.add_argument("--stopwords", default=None)
    p.add_argument("--word-dim", type=int, default=200)
    p.add_argument("--tfidf-variant", choices=("count", "log", "binary"),
                   default="count")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_build_graphs)

    p = sub.add_parser("train", help="train on a graph bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--split", choices=("train", "val", "test"), required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="train all 8 view-pair subsets")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", default="0", help="comma-separated seed list")
    _add_train_flags(p)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e.code}: {e}", file=sys.stderr)
        return 2
    except (CorpusError, ValueError, FloatingPointError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
