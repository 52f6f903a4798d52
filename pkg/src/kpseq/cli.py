"""Command-line entry point: preprocess, stats, train, predict, eval, baseline.

Exit codes: 0 success, 1 usage error, 2 data error.  Defaults mirror the
training hyperparameters the toolkit is built around (lr 0.05, batch 4,
100 epochs, patience 4, anneal 0.5, hidden 128, word dropout 0.05).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from kpseq import baselines, corpus, evaluate, training
from kpseq.embeddings import (
    ContextualEmbedder,
    EmbeddingError,
    FixedEmbedder,
    load_contextual,
    load_fixed,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="kpseq", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("preprocess", help="tokenize and B-I-O tag a raw corpus")
    p.add_argument("raw", help="raw corpus JSONL")
    p.add_argument("-o", "--output", required=True, help="processed corpus JSONL")
    p.add_argument("--max-tokens", type=int, default=corpus.DEFAULT_MAX_TOKENS)
    p.add_argument("--warn-dropped", action="store_true",
                   help="report how many gold phrases had no extractive match")

    p = sub.add_parser("stats", help="dataset statistics of a processed corpus")
    p.add_argument("processed")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("train", help="train a BiLSTM-CRF (or plain BiLSTM) tagger")
    p.add_argument("train_file")
    p.add_argument("dev_file")
    emb = p.add_mutually_exclusive_group(required=True)
    emb.add_argument("--embeddings", help="fixed embedding table (text format)")
    emb.add_argument("--contextual", help="precomputed contextual store (JSONL)")
    p.add_argument("--no-crf", action="store_true", help="softmax head ablation")
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=4)
    p.add_argument("--anneal", type=float, default=0.5)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--word-dropout", type=float, default=0.05)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-lr", type=float, default=1e-4)
    p.add_argument("--oov", choices=["zeros", "averaged"], default="zeros")
    p.add_argument("--peephole", choices=["diagonal", "full"], default="diagonal")
    p.add_argument("--peephole-o-prev", action="store_true",
                   help="output-gate peephole reads the previous cell state")
    p.add_argument("--history", help="write per-epoch CSV history here")
    p.add_argument("-o", "--output", required=True, help="checkpoint path")

    p = sub.add_parser("predict", help="decode a processed corpus with a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("processed")
    emb = p.add_mutually_exclusive_group(required=True)
    emb.add_argument("--embeddings")
    emb.add_argument("--contextual")
    p.add_argument("--oov", choices=["zeros", "averaged"], default="zeros")
    p.add_argument("--constrain-bio", action="store_true",
                   help="forbid START->I and O->I transitions at decode time")
    p.add_argument("-o", "--output", required=True, help="predictions JSONL")

    p = sub.add_parser("eval", help="exact-match P/R/F1 of predictions vs gold")
    p.add_argument("predictions")
    p.add_argument("gold", help="processed corpus with gold labels")
    p.add_argument("--macro", action="store_true", help="macro-average instead of micro")
    p.add_argument("--stem", action="store_true", help="Porter-stem both sides before matching")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("baseline", help="run and score an unsupervised/KEA baseline")
    p.add_argument("method", choices=baselines.METHODS)
    p.add_argument("processed")
    p.add_argument("-k", type=int, default=None,
                   help="fixed cutoff (default: per-doc gold count)")
    p.add_argument("--train", help="training corpus for kea (default: the eval corpus)")
    p.add_argument("--predictions", help="also write ranked predictions here")
    p.add_argument("--json", action="store_true")
    return parser


def _echo_config(args: argparse.Namespace) -> None:
    shown = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    print(f"# kpseq {args.command} " + " ".join(f"{k}={v}" for k, v in shown.items()))


def _make_embedder(args):
    if args.embeddings:
        return FixedEmbedder(load_fixed(args.embeddings, oov_policy=args.oov))
    return ContextualEmbedder(load_contextual(args.contextual))


def _cmd_preprocess(args) -> int:
    raws = corpus.load_raw(args.raw)
    docs = []
    dropped = 0
    for raw in raws:
        docs.append(corpus.process_raw(raw))
        if args.warn_dropped:
            dropped += corpus.count_dropped(raw)
    for doc in docs:
        if len(doc) > args.max_tokens:
            raise corpus.CorpusError(
                f"document has {len(doc)} tokens, over the {args.max_tokens} limit",
                doc_id=doc.doc_id,
            )
    corpus.save_processed(docs, args.output)
    print(f"wrote {len(docs)} documents to {args.output}")
    if args.warn_dropped:
        print(f"dropped {dropped} gold phrases with no extractive match")
    return EXIT_OK


def _cmd_stats(args) -> int:
    docs = corpus.load_processed(args.processed)
    stats = corpus.compute_stats(docs)
    if args.json:
        print(json.dumps(dataclasses.asdict(stats)))
    else:
        print(f"num_docs        {stats.num_docs}")
        print(f"avg_keyphrases  {stats.avg_keyphrases:.2f}")
        print(f"max_phrase_len  {stats.max_phrase_len}")
        print(f"avg_phrase_len  {stats.avg_phrase_len:.2f}")
        print(f"avg_tokens      {stats.avg_tokens:.2f}")
        print(f"max_tokens      {stats.max_tokens}")
        print(f"min_tokens      {stats.min_tokens}")
    return EXIT_OK


def _cmd_train(args) -> int:
    train_docs = corpus.load_processed(args.train_file)
    dev_docs = corpus.load_processed(args.dev_file)
    embedder = _make_embedder(args)
    config = training.TrainConfig(
        lr=args.lr,
        batch_size=args.batch,
        epochs=args.epochs,
        patience=args.patience,
        anneal_factor=args.anneal,
        momentum=args.momentum,
        hidden_size=args.hidden,
        word_dropout=args.word_dropout,
        use_crf=not args.no_crf,
        seed=args.seed,
        min_lr=args.min_lr,
        peephole=args.peephole,
        o_peephole_prev=args.peephole_o_prev,
    )
    params, history = training.train(train_docs, dev_docs, embedder, config, log=print)
    training.save_checkpoint(params, config, args.output)
    if args.history:
        history.to_csv(args.history)
    best = max((r.dev_f1 for r in history.epochs), default=0.0)
    print(f"saved checkpoint to {args.output} (best dev F1 {best:.4f})")
    return EXIT_OK


def _cmd_predict(args) -> int:
    params, config = training.load_checkpoint(args.checkpoint)
    config.constrain_bio = args.constrain_bio
    docs = corpus.load_processed(args.processed)
    embedder = _make_embedder(args)
    preds = {}
    for doc in docs:
        labels = training.decode_document(params, embedder(doc), config)
        preds[doc.doc_id] = evaluate.decode_spans(labels, doc.tokens)
    evaluate.save_predictions(preds, args.output)
    print(f"wrote predictions for {len(preds)} documents to {args.output}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    preds = evaluate.load_predictions(args.predictions)
    gold_docs = corpus.load_processed(args.gold)
    pairs = []
    for doc in gold_docs:
        if doc.doc_id not in preds:
            raise corpus.CorpusError("no prediction for document", doc_id=doc.doc_id)
        pairs.append((preds[doc.doc_id], doc.gold_phrases))
    metrics = evaluate.corpus_metrics(
        pairs, averaging="macro" if args.macro else "micro", stem=args.stem
    )
    if args.json:
        print(json.dumps(metrics.to_dict()))
    else:
        print(f"precision  {metrics.precision:.4f}")
        print(f"recall     {metrics.recall:.4f}")
        print(f"f1         {metrics.f1:.4f}")
        print(f"(tp={metrics.tp} n_pred={metrics.n_pred} n_gold={metrics.n_gold}, "
              f"{metrics.averaging})")
    return EXIT_OK


def _cmd_baseline(args) -> int:
    docs = corpus.load_processed(args.processed)
    train_docs = corpus.load_processed(args.train) if args.train else None
    metrics = baselines.baseline_evaluate(args.method, docs, k=args.k, train_docs=train_docs)
    if args.predictions:
        model = baselines.kea_train(train_docs or docs) if args.method == "kea" else None
        preds = {}
        for doc in docs:
            cutoff = args.k if args.k is not None else len(doc.gold_phrases)
            if args.method == "textrank":
                ranked = baselines.textrank(doc)
            elif args.method == "singlerank":
                ranked = baselines.singlerank(doc)
            else:
                ranked = baselines.kea_rank(model, doc)
            preds[doc.doc_id] = set(ranked.top(cutoff))
        evaluate.save_predictions(preds, args.predictions)
    if args.json:
        print(json.dumps({"method": args.method, **metrics.to_dict()}))
    else:
        print(f"{args.method}: P={metrics.precision:.4f} R={metrics.recall:.4f} "
              f"F1={metrics.f1:.4f}")
    return EXIT_OK


_COMMANDS = {
    "preprocess": _cmd_preprocess,
    "stats": _cmd_stats,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "baseline": _cmd_baseline,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    _echo_config(args)
    try:
        return _COMMANDS[args.command](args)
    except (corpus.CorpusError, EmbeddingError, training.CheckpointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
