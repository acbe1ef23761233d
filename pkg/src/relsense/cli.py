"""Command line interface: import, train, eval, compare.

Experiments are described by flat INI files (section/key pairs mirror
ExperimentConfig), one file per run, so a whole experiment grid is just a
directory of configs. Exit codes: 0 success, 1 runtime failure, 2
usage or configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .corpus import (CorpusSplit, build_inventory, expand_multilabel,
                     load_relations, save_relations, split_by_sections)
from .encoder import BiLstmEncoder, load_glove
from .errors import ConfigError, InventoryMismatchError
from .features import load_brown_clusters
from .importers import import_conll_json, import_pdtb_pipes
from .model import (InputPlan, RelationModel, load_checkpoint,
                    read_checkpoint_config, save_checkpoint)
from .nn import make_rng
from .training import (TrainConfig, error_overlap, evaluate, most_common_class,
                       read_report, train, write_history, write_report)
from .vectors import load_ngram_table, load_vector_file

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

IMPORT_FORMATS = ("pdtb-pipes", "conll-json", "normalized")
MODEL_KINDS = ("bilstm", "pretrained", "combined")


@dataclass
class ExperimentConfig:
    """One experiment: data paths, model selection, training settings."""

    corpus: str
    kind: str
    output_dir: str
    glove: str | None = None
    vectors: str | None = None
    ngrams: str | None = None
    clusters: str | None = None
    pooling: str = "concat"
    hidden_size: int = 250
    head_layers: int | None = None
    hidden_width: int | None = None
    word_pairs: bool = False
    wordpair_dim: int = 2 ** 15
    freeze_encoder: bool = False
    implicit_only: bool = True
    train: TrainConfig = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"model kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.train is None:
            self.train = TrainConfig()

    def validate_paths(self) -> None:
        required = {"corpus": self.corpus}
        if self.kind in ("bilstm", "combined"):
            required["glove"] = self.glove
        if self.kind in ("pretrained", "combined"):
            if (self.vectors is None) == (self.ngrams is None):
                raise ConfigError(
                    "pretrained models need exactly one of paths.vectors / paths.ngrams")
            required["vectors" if self.vectors else "ngrams"] = self.vectors or self.ngrams
        if self.word_pairs:
            required["clusters"] = self.clusters
        for name, value in required.items():
            if not value:
                raise ConfigError(f"missing required path: {name}")
            if not Path(value).exists():
                raise ConfigError(f"{name} path does not exist: {value}")


def load_experiment_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    def get(section, key, fallback=None):
        return parser.get(section, key, fallback=fallback)

    try:
        train_cfg = TrainConfig(
            learning_rate=parser.getfloat("training", "learning_rate", fallback=0.001),
            dropout=parser.getfloat("training", "dropout", fallback=0.35),
            batch_size=parser.getint("training", "batch_size", fallback=64),
            max_epochs=parser.getint("training", "max_epochs", fallback=50),
            patience=parser.getint("training", "patience", fallback=10),
            seed=parser.getint("training", "seed", fallback=0),
            loss=get("training", "loss", "nll"),
            hinge_margin=parser.getfloat("training", "hinge_margin", fallback=1.0),
        )
        head_layers = get("model", "head_layers")
        hidden_width = get("model", "hidden_width")
        config = ExperimentConfig(
            corpus=get("paths", "corpus", ""),
            glove=get("paths", "glove"),
            vectors=get("paths", "vectors"),
            ngrams=get("paths", "ngrams"),
            clusters=get("paths", "clusters"),
            kind=get("model", "kind", ""),
            pooling=get("model", "pooling", "concat"),
            hidden_size=parser.getint("model", "hidden_size", fallback=250),
            head_layers=int(head_layers) if head_layers else None,
            hidden_width=int(hidden_width) if hidden_width else None,
            word_pairs=parser.getboolean("model", "word_pairs", fallback=False),
            wordpair_dim=parser.getint("model", "wordpair_dim", fallback=2 ** 15),
            freeze_encoder=parser.getboolean("model", "freeze_encoder", fallback=False),
            implicit_only=parser.getboolean("model", "implicit_only", fallback=True),
            output_dir=get("output", "dir", ""),
            train=train_cfg,
        )
    except (configparser.Error, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config {path}: {exc}") from None
    if not config.output_dir:
        raise ConfigError("missing output.dir")
    return config


def _build_model(config: ExperimentConfig, inventory, rng):
    encoder = store = ngrams = clusters = None
    resources: dict[str, str] = {}
    use_bilstm = config.kind in ("bilstm", "combined")
    use_pretrained = config.kind in ("pretrained", "combined")
    bilstm_dim = 0
    pretrained_dim = 0
    if use_bilstm:
        table = load_glove(config.glove)
        encoder = BiLstmEncoder(table, config.hidden_size, rng, num_layers=2,
                                pooling=config.pooling)
        bilstm_dim = encoder.output_dim
        resources["glove"] = str(config.glove)
    if use_pretrained:
        if config.vectors:
            store = load_vector_file(config.vectors)
            pretrained_dim = store.dimension
            resources["vectors"] = str(config.vectors)
        else:
            ngrams = load_ngram_table(config.ngrams)
            pretrained_dim = ngrams.dimension
            resources["ngrams"] = str(config.ngrams)
    if config.word_pairs:
        clusters = load_brown_clusters(config.clusters)
        resources["clusters"] = str(config.clusters)
    plan = InputPlan(
        use_bilstm=use_bilstm, use_pretrained=use_pretrained,
        use_wordpairs=config.word_pairs, pooling=config.pooling,
        bilstm_dim=bilstm_dim, pretrained_dim=pretrained_dim,
        wordpair_dim=config.wordpair_dim if config.word_pairs else 0)
    model = RelationModel.build(
        plan, inventory, rng, encoder=encoder, store=store, ngrams=ngrams,
        clusters=clusters, head_layers=config.head_layers,
        hidden_width=config.hidden_width, dropout=config.train.dropout,
        freeze_encoder=config.freeze_encoder)
    return model, resources


def _load_split(config: ExperimentConfig) -> CorpusSplit:
    instances = load_relations(config.corpus, implicit_only=config.implicit_only)
    return split_by_sections(instances)


def cmd_import(args) -> int:
    out_path = Path(args.out)
    if args.format == "normalized":
        # validate strictly, then copy the input bytes line for line
        load_relations(args.input)
        with open(args.input, encoding="utf-8") as fh:
            lines = fh.readlines()
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.writelines(lines)
        instances = load_relations(out_path)
    elif args.format == "conll-json":
        instances = import_conll_json(args.input, split=args.split)
        save_relations(instances, out_path)
    else:
        instances = import_pdtb_pipes(args.input, split=args.split)
        save_relations(instances, out_path)
    counts: dict[str, int] = {}
    for inst in instances:
        counts[inst.split or "unsplit"] = counts.get(inst.split or "unsplit", 0) + 1
    print(f"imported {len(instances)} instances -> {out_path}")
    for name in sorted(counts):
        print(f"  {name}: {counts[name]}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = load_experiment_config(args.config)
    if args.seed is not None:
        config.train.seed = args.seed
    if args.out:
        config.output_dir = args.out
    config.validate_paths()
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    split = _load_split(config)
    if not split.train or not split.dev:
        raise ValueError("corpus has an empty train or dev split")
    inventory = build_inventory(split.train)
    pairs = expand_multilabel(split.train, inventory)
    rng = make_rng(config.train.seed)
    model, resources = _build_model(config, inventory, rng)
    history = train(model, pairs, split.dev, config.train)
    save_checkpoint(model, out_dir / "model.ckpt", resources=resources)
    write_history(history, out_dir / "history.csv")
    dev_report = evaluate(model, split.dev)
    write_report(dev_report, out_dir / "dev_report.json", out_dir / "dev_report.tsv")
    best = max((h["dev_accuracy"] for h in history), default=0.0)
    print(f"trained {config.kind} model: {len(history)} epochs, "
          f"best dev accuracy {best:.4f}")
    print(f"artifacts in {out_dir}")
    return EXIT_OK


def _classifier_for_eval(args, corpus_split: CorpusSplit):
    if args.baseline:
        if not corpus_split.train:
            raise ValueError("baseline needs a non-empty train split")
        inventory = build_inventory(corpus_split.train)
        return most_common_class(corpus_split.train, inventory)
    if not args.checkpoint:
        raise ConfigError("eval needs --checkpoint (or --baseline)")
    config = read_checkpoint_config(args.checkpoint)
    resources = config.get("resources") or {}
    table = store = ngrams = clusters = None
    if config["encoder"] is not None:
        if "glove" not in resources:
            raise ConfigError("checkpoint records no glove path; cannot rebuild encoder")
        table = load_glove(resources["glove"])
    if config["plan"]["use_pretrained"]:
        if config.get("pretrained_source") == "ngrams":
            ngrams = load_ngram_table(resources["ngrams"])
        else:
            store = load_vector_file(resources["vectors"])
    if config["plan"]["use_wordpairs"]:
        clusters = load_brown_clusters(resources["clusters"])
    return load_checkpoint(args.checkpoint, table=table, store=store,
                           ngrams=ngrams, clusters=clusters)


def cmd_eval(args) -> int:
    instances = load_relations(args.corpus, implicit_only=True)
    split = split_by_sections(instances)
    subset = split.named(args.split)
    if not subset:
        raise ValueError(f"split {args.split!r} is empty")
    classifier = _classifier_for_eval(args, split)
    inventory = classifier.inventory
    gold_labels = {s for inst in subset for s in inst.senses}
    if not gold_labels & set(inventory):
        raise InventoryMismatchError(
            "no gold label of the evaluation split appears in the model inventory")
    report = evaluate(classifier, subset)
    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report(report, out_dir / "report.json", out_dir / "report.tsv")
    print(f"{args.split} accuracy: {report.accuracy:.4f} "
          f"({report.n_correct}/{report.n_instances})")
    if report.never_predictable:
        print("never-predictable senses: " + ", ".join(report.never_predictable))
    return EXIT_OK


def cmd_compare(args) -> int:
    report_a = read_report(args.report_a)
    report_b = read_report(args.report_b)
    stats = error_overlap(report_a, report_b)
    print(f"shared errors: {stats.shared_errors}")
    print(f"union errors:  {stats.union_errors}")
    print(f"jaccard:       {stats.jaccard:.4f}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "overlap.json", "w", encoding="utf-8") as fh:
            json.dump({
                "shared_errors": stats.shared_errors,
                "union_errors": stats.union_errors,
                "jaccard": stats.jaccard,
                "shared_ids": list(stats.shared_ids),
            }, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relsense",
        description="Implicit discourse relation sense classification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_import = sub.add_parser("import", help="convert a corpus to normalized JSONL")
    p_import.add_argument("format", choices=IMPORT_FORMATS)
    p_import.add_argument("input")
    p_import.add_argument("out")
    p_import.add_argument("--split", choices=("train", "dev", "test", "blind"),
                          help="stamp this split on every imported instance")
    p_import.set_defaults(func=cmd_import)

    p_train = sub.add_parser("train", help="train a model from an experiment config")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--seed", type=int, help="override the config seed")
    p_train.add_argument("--out", help="override the config output directory")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint or the baseline")
    p_eval.add_argument("--checkpoint")
    p_eval.add_argument("--corpus", required=True)
    p_eval.add_argument("--split", default="test",
                        choices=("train", "dev", "test", "blind"))
    p_eval.add_argument("--baseline", action="store_true",
                        help="evaluate the most-common-class baseline instead")
    p_eval.add_argument("--out")
    p_eval.set_defaults(func=cmd_eval)

    p_cmp = sub.add_parser("compare", help="error overlap between two eval reports")
    p_cmp.add_argument("report_a")
    p_cmp.add_argument("report_b")
    p_cmp.add_argument("--out")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # runtime failures map to exit code 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
