"""Command-line interface: ``polarity train|predict|evaluate|inspect``.

Exit codes: 0 success, 2 usage/configuration/input-format error,
3 data or model error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bundle import load_bundle, read_bundle, save_bundle
from .config import CONFIG_ENV, RunConfig, load_config
from .corpus import CLASSES, concat, labels_of, load_dataset, summarize
from .embeddings import file_digest, load_embeddings
from .ensemble import SoftVotingEnsemble
from .evaluation import confusion, evaluate, report
from .exceptions import ConfigError, CorpusError, IoFailure, PolarityError
from .preprocess import load_stopwords

log = logging.getLogger("polarity")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def _require_file(path, what: str) -> None:
    if path is None:
        raise ConfigError(f"no {what} configured")
    if not Path(path).is_file():
        raise ConfigError(f"{what} {path} does not exist")


def _load_embeddings(cfg: RunConfig):
    _require_file(cfg.embeddings, "embedding file")
    log.info("loading embeddings from %s", cfg.embeddings)
    table = load_embeddings(cfg.embeddings, cfg.embeddings_format, cfg.vocab_limit)
    return table, file_digest(cfg.embeddings)


def build_model(cfg: RunConfig, embeddings=None, stopwords=None) -> SoftVotingEnsemble:
    return SoftVotingEnsemble(
        embeddings=embeddings, views=list(cfg.views), weights=cfg.weights, stopwords=stopwords,
        drop_urls=cfg.drop_urls, tfidf_mode=cfg.tfidf_mode, min_df=cfg.min_df,
        l2_normalize=cfg.l2_normalize, oov_seed=cfg.oov_seed, oov_half_width=cfg.oov_half_width,
        C=cfg.C, max_epochs=cfg.max_epochs, tol=cfg.tol, eta0=cfg.eta0, random_state=cfg.seed,
    )


def _config_snapshot(cfg: RunConfig) -> dict:
    return {k: v for k, v in dataclasses.asdict(cfg).items() if v is not None}


def cmd_train(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    if not cfg.train:
        raise ConfigError("no training files configured (key 'train')")
    for path in cfg.train:
        _require_file(path, "training file")
    if cfg.stopwords is not None:
        _require_file(cfg.stopwords, "stopword file")
    embeddings, digest = (None, None)
    if cfg.needs_embeddings:
        embeddings, digest = _load_embeddings(cfg)

    datasets = [load_dataset(p, has_labels=True) for p in cfg.train]
    for path, ds in zip(cfg.train, datasets):
        print(f"{path}: {summarize(ds)}", file=out)
    data = concat(datasets)
    print(f"training on {summarize(data)}", file=out)

    stopwords = load_stopwords(cfg.stopwords)
    model = build_model(cfg, embeddings, stopwords)
    docs = [rec.doc for rec in data]
    model.fit(docs, labels_of(data))

    gold = labels_of(data)
    for spec, probs in zip(model.view_specs_, model.view_probabilities(docs)):
        pred = [CLASSES[i] for i in np.argmax(probs, axis=1)]
        print(f"view {spec}: training accuracy {report(confusion(gold, pred)).accuracy:.4f}", file=out)
    print(f"ensemble: training accuracy {report(confusion(gold, model.predict(docs))).accuracy:.4f}", file=out)

    save_bundle(model, cfg.model, digest, _config_snapshot(cfg))
    print(f"wrote {cfg.model}", file=out)
    return EXIT_OK


def _load_model(cfg: RunConfig):
    _require_file(cfg.model, "model bundle")
    meta, _ = read_bundle(cfg.model)
    embeddings, digest = (None, None)
    if meta.get("embedding") is not None:
        embeddings, digest = _load_embeddings(cfg)
    return load_bundle(cfg.model, embeddings, digest)


def write_predictions(path, docs, proba) -> None:
    lines = ["id\tlabel\tp_pos\tp_neg\tp_neu"]
    for doc, row in zip(docs, proba):
        label = CLASSES[int(np.argmax(row))]
        lines.append(f"{doc.id}\t{label.value}\t{row[0]:.6f}\t{row[1]:.6f}\t{row[2]:.6f}")
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write predictions to {path}: {exc}") from exc


def cmd_predict(cfg: RunConfig, input_path, output_path, has_labels: bool = False, out=None) -> int:
    out = out or sys.stdout
    _require_file(input_path, "input file")
    model = _load_model(cfg)
    records = load_dataset(input_path, has_labels=has_labels)
    docs = [getattr(r, "doc", r) for r in records]
    proba = model.predict_proba(docs) if docs else np.zeros((0, len(CLASSES)))
    write_predictions(output_path, docs, proba)
    print(f"wrote {len(docs)} predictions to {output_path}", file=out)
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, input_path=None, report_path=None, out=None) -> int:
    out = out or sys.stdout
    input_path = input_path or cfg.test
    _require_file(input_path, "evaluation file")
    data = load_dataset(input_path, has_labels=True)
    model = _load_model(cfg)
    rep = evaluate(model, data)
    print(f"{input_path}: {summarize(data)}", file=out)
    print(rep.format_text(), file=out)
    report_path = report_path or f"{cfg.model}.report.json"
    try:
        Path(report_path).write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write report to {report_path}: {exc}") from exc
    print(f"wrote {report_path}", file=out)
    return EXIT_OK


def cmd_inspect(bundle_path, out=None) -> int:
    out = out or sys.stdout
    _require_file(bundle_path, "model bundle")
    meta, arrays = read_bundle(bundle_path)
    tfidf = meta.get("tfidf")
    emb = meta.get("embedding")
    print(f"format_version  {meta['format_version']}", file=out)
    print(f"classes         {', '.join(meta['classes'])}", file=out)
    print(f"views           {', '.join(meta['params']['views'])}", file=out)
    print(f"view_weights    {', '.join(f'{w:g}' for w in meta['view_weights'])}", file=out)
    print(f"vocabulary_size {len(tfidf['terms']) if tfidf else 0}", file=out)
    if tfidf:
        print(f"tfidf           mode={tfidf['mode']} l2_normalize={tfidf['l2_normalize']} "
              f"doc_count={tfidf['doc_count']}", file=out)
    print(f"embedding       {emb['digest'] if emb else 'none'}"
          + (f" (dim {emb['dim']})" if emb else ""), file=out)
    for m in meta["models"]:
        print(f"model           {m['view']}: {m['kind']} {m['strategy']}, "
              f"{len(m['pairs'])} binary problem(s)", file=out)
    return EXIT_OK


_COMMANDS = ("train", "predict", "evaluate", "inspect")


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("configuration overrides")
    for f in dataclasses.fields(RunConfig):
        flags = [f"--{f.name}"]
        if "_" in f.name:
            flags.append(f"--{f.name.replace('_', '-')}")
        group.add_argument(*flags, dest=f"override_{f.name}", metavar="VALUE", default=None,
                           help=f"override '{f.name}'" + (" (comma-separated)" if f.name in
                                                           ("train", "views", "weights") else ""))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarity", description="Multi-view polarity classifier.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None,
                       help=f"TOML config file (default: ${CONFIG_ENV})")
        _add_overrides(p)

    common(sub.add_parser("train", help="fit the ensemble and write a model bundle"))
    p = sub.add_parser("predict", help="label an id<TAB>text file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--labeled", action="store_true", help="input has a label column (ignored)")
    common(p)
    p = sub.add_parser("evaluate", help="score the model on a labeled file")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--report", default=None, help="JSON report path (default <model>.report.json)")
    common(p)
    p = sub.add_parser("inspect", help="print bundle metadata")
    p.add_argument("bundle", nargs="?", default=None)
    common(p)
    return parser


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (ConfigError, CorpusError, IoFailure)):
        return EXIT_USAGE
    return EXIT_DATA


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    overrides = {k[len("override_"):]: v for k, v in vars(args).items()
                 if k.startswith("override_") and v is not None}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "predict":
            return cmd_predict(cfg, args.input, args.output, has_labels=args.labeled)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.input, args.report)
        return cmd_inspect(args.bundle or cfg.model)
    except PolarityError as exc:
        print(f"polarity {args.command}: error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
